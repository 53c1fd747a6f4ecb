#include "pulsepol/seqdsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "pulsepol/error.hpp"
#include "pulsepol/format.hpp"

namespace pulsepol::dsl {

bool Group::operator==(const Group&) const = default;

namespace {

constexpr double kPi = std::numbers::pi;

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  SeqAst run() {
    SeqAst ast;
    skip_space();
    while (!at_end()) {
      ast.items.push_back(item());
      skip_space();
    }
    return ast;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

  void skip_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\n' || peek() == '\t' ||
                         peek() == '\r')) {
      ++pos_;
    }
  }

  bool accept(std::string_view lit) {
    if (text_.substr(pos_, lit.size()) == lit) {
      pos_ += lit.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view lit) {
    if (!accept(lit)) fail("expected '" + std::string(lit) + "'");
  }

  double number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < text_.size()) {
      const char c = text_[end];
      const bool sign_ok = (c == '-' || c == '+') &&
                           (end == start || text_[end - 1] == 'e' || text_[end - 1] == 'E');
      if ((c >= '0' && c <= '9') || c == '.' || c == 'e' || c == 'E' || sign_ok) {
        ++end;
      } else {
        break;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + end;
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr == first) fail("expected a number");
    if (!std::isfinite(value)) fail("number is not finite");
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return value;
  }

  unsigned integer() {
    const std::size_t start = pos_;
    unsigned value = 0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (res.ec != std::errc{} || res.ptr == text_.data() + pos_) {
      fail("expected an integer exponent");
    }
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    if (value == 0) fail("exponent must be >= 1", start);
    return value;
  }

  Item item() {
    switch (peek()) {
      case '(':
        return Item{pulse()};
      case '~':
        return Item{delay()};
      case '[':
        return Item{group()};
      case 'c':
        return Item{chirp()};
      default:
        fail(std::string("unexpected character '") + peek() + "'");
    }
  }

  Phase phase() {
    const std::size_t start = pos_;
    if (accept("X")) return {Phase::Kind::kX, 0.0};
    if (accept("Y")) return {Phase::Kind::kY, 0.0};
    if (accept("-X")) return {Phase::Kind::kMinusX, 0.0};
    if (accept("-Y")) return {Phase::Kind::kMinusY, 0.0};
    const char c = peek();
    const bool numeric = (c >= '0' && c <= '9') || c == '.' ||
                         (c == '-' && (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                                       peek(1) == '.'));
    if (!numeric) fail("unknown phase token", start);
    const double deg = number();
    if (!accept("deg")) fail("unknown phase token", start);
    return {Phase::Kind::kDegrees, deg};
  }

  PulseNode pulse() {
    expect("(");
    PulseNode p;
    if (accept("pi/2")) {
      p.angle = {Angle::Kind::kHalfPi, 0.0};
    } else if (accept("pi")) {
      p.angle = {Angle::Kind::kPi, 0.0};
    } else {
      const double deg = number();
      expect("deg");
      p.angle = {Angle::Kind::kDegrees, deg};
    }
    expect(")_");
    p.phase = phase();
    if (accept("@")) {
      p.rabi_mhz = number();
      expect("MHz");
    }
    end_of_token();
    return p;
  }

  DelayNode delay() {
    expect("~");
    DelayNode d;
    if (accept("tau/4")) {
      d.kind = DelayNode::Kind::kTauQuarter;
    } else if (accept("tau/2")) {
      d.kind = DelayNode::Kind::kTauHalf;
    } else if (accept("tau")) {
      d.kind = DelayNode::Kind::kTau;
    } else {
      const std::size_t start = pos_;
      d.kind = DelayNode::Kind::kNs;
      d.ns = number();
      if (d.ns < 0.0) fail("delay must be >= 0", start);
      expect("ns");
    }
    end_of_token();
    return d;
  }

  ChirpNode chirp() {
    expect("chirp(");
    ChirpNode c;
    const std::size_t start = pos_;
    c.duration_ns = number();
    if (c.duration_ns < 0.0) fail("chirp duration must be >= 0", start);
    expect("ns,");
    c.rabi_mhz = number();
    expect("MHz,");
    c.start_mhz = number();
    expect("MHz,");
    c.end_mhz = number();
    expect("MHz)_");
    c.phase = phase();
    end_of_token();
    return c;
  }

  Group group() {
    expect("[");
    Group g;
    skip_space();
    while (!at_end() && peek() != ']') {
      g.items.push_back(item());
      skip_space();
    }
    if (at_end()) fail("unterminated group");
    if (g.items.empty()) fail("group must contain at least one item");
    expect("]^");
    g.exponent = integer();
    end_of_token();
    return g;
  }

  void end_of_token() {
    if (!at_end() && peek() != ' ' && peek() != '\n' && peek() != '\t' &&
        peek() != '\r' && peek() != ']') {
      fail(std::string("unexpected character '") + peek() + "'");
    }
  }
};

void render_phase(std::string& out, const Phase& p) {
  switch (p.kind) {
    case Phase::Kind::kX: out += "X"; break;
    case Phase::Kind::kY: out += "Y"; break;
    case Phase::Kind::kMinusX: out += "-X"; break;
    case Phase::Kind::kMinusY: out += "-Y"; break;
    case Phase::Kind::kDegrees:
      out += format_double(p.degrees);
      out += "deg";
      break;
  }
}

void render_items(std::string& out, const std::vector<Item>& items);

void render_item(std::string& out, const Item& item) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, PulseNode>) {
          out += "(";
          switch (node.angle.kind) {
            case Angle::Kind::kPi: out += "pi"; break;
            case Angle::Kind::kHalfPi: out += "pi/2"; break;
            case Angle::Kind::kDegrees:
              out += format_double(node.angle.degrees);
              out += "deg";
              break;
          }
          out += ")_";
          render_phase(out, node.phase);
          if (node.rabi_mhz) {
            out += "@";
            out += format_double(*node.rabi_mhz);
            out += "MHz";
          }
        } else if constexpr (std::is_same_v<T, DelayNode>) {
          out += "~";
          switch (node.kind) {
            case DelayNode::Kind::kTauQuarter: out += "tau/4"; break;
            case DelayNode::Kind::kTauHalf: out += "tau/2"; break;
            case DelayNode::Kind::kTau: out += "tau"; break;
            case DelayNode::Kind::kNs:
              out += format_double(node.ns);
              out += "ns";
              break;
          }
        } else if constexpr (std::is_same_v<T, ChirpNode>) {
          out += "chirp(";
          out += format_double(node.duration_ns) + "ns,";
          out += format_double(node.rabi_mhz) + "MHz,";
          out += format_double(node.start_mhz) + "MHz,";
          out += format_double(node.end_mhz) + "MHz)_";
          render_phase(out, node.phase);
        } else {
          out += "[ ";
          render_items(out, node.items);
          out += " ]^";
          out += std::to_string(node.exponent);
        }
      },
      item.node);
}

void render_items(std::string& out, const std::vector<Item>& items) {
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k) out += ' ';
    render_item(out, items[k]);
  }
}

double phase_radians(const Phase& p) {
  switch (p.kind) {
    case Phase::Kind::kX: return phase::kX;
    case Phase::Kind::kY: return phase::kY;
    case Phase::Kind::kMinusX: return phase::kMinusX;
    case Phase::Kind::kMinusY: return phase::kMinusY;
    case Phase::Kind::kDegrees: return p.degrees * kPi / 180.0;
  }
  return 0.0;
}

constexpr double kMHz = 2.0 * kPi * 1e6;

void lower_items(const std::vector<Item>& items, const Bindings& b,
                 std::vector<Element>& out) {
  for (const auto& item : items) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, PulseNode>) {
            double angle = 0.0;
            switch (node.angle.kind) {
              case Angle::Kind::kPi: angle = kPi; break;
              case Angle::Kind::kHalfPi: angle = kPi / 2; break;
              case Angle::Kind::kDegrees: angle = node.angle.degrees * kPi / 180.0; break;
            }
            const double rabi = node.rabi_mhz ? *node.rabi_mhz * kMHz : b.rabi;
            if (!b.ideal && !(rabi > 0.0)) {
              throw InvalidArgument("lower: pulse needs a positive Rabi frequency");
            }
            out.push_back(Pulse{angle, phase_radians(node.phase), rabi, b.ideal});
          } else if constexpr (std::is_same_v<T, DelayNode>) {
            if (node.kind != DelayNode::Kind::kNs && !(b.tau > 0.0)) {
              throw InvalidArgument("lower: symbolic delay needs tau > 0");
            }
            switch (node.kind) {
              case DelayNode::Kind::kTauQuarter:
                out.push_back(Delay{b.tau / 4.0, DelaySymbol::kTauQuarter});
                break;
              case DelayNode::Kind::kTauHalf:
                out.push_back(Delay{b.tau / 2.0, DelaySymbol::kTauHalf});
                break;
              case DelayNode::Kind::kTau:
                out.push_back(Delay{b.tau, DelaySymbol::kTau});
                break;
              case DelayNode::Kind::kNs:
                out.push_back(Delay{node.ns * 1e-9, DelaySymbol::kNone});
                break;
            }
          } else if constexpr (std::is_same_v<T, ChirpNode>) {
            out.push_back(Chirp{node.duration_ns * 1e-9, node.rabi_mhz * kMHz,
                                node.start_mhz * kMHz, node.end_mhz * kMHz,
                                phase_radians(node.phase)});
          } else {
            for (unsigned r = 0; r < node.exponent; ++r) lower_items(node.items, b, out);
          }
        },
        item.node);
  }
}

Phase phase_node(double phi) {
  const double w = wrap_phase(phi);
  auto near = [&](double target) { return std::abs(w - target) < 1e-12; };
  if (near(phase::kX)) return {Phase::Kind::kX, 0.0};
  if (near(phase::kY)) return {Phase::Kind::kY, 0.0};
  if (near(phase::kMinusX)) return {Phase::Kind::kMinusX, 0.0};
  if (near(phase::kMinusY)) return {Phase::Kind::kMinusY, 0.0};
  return {Phase::Kind::kDegrees, phi * 180.0 / kPi};
}

bool same_element(const Element& a, const Element& b) {
  if (a.index() != b.index()) return false;
  if (const auto* pa = std::get_if<Pulse>(&a)) {
    const auto& pb = std::get<Pulse>(b);
    return pa->angle == pb.angle && pa->phase == pb.phase && pa->rabi == pb.rabi &&
           pa->ideal == pb.ideal;
  }
  if (const auto* da = std::get_if<Delay>(&a)) {
    const auto& db = std::get<Delay>(b);
    return da->duration == db.duration && da->symbol == db.symbol;
  }
  const auto& ca = std::get<Chirp>(a);
  const auto& cb = std::get<Chirp>(b);
  return ca.duration == cb.duration && ca.rabi == cb.rabi &&
         ca.detuning_start == cb.detuning_start && ca.detuning_end == cb.detuning_end &&
         ca.phase == cb.phase;
}

Item element_item(const Element& e, double default_rabi) {
  if (const auto* p = std::get_if<Pulse>(&e)) {
    PulseNode n;
    if (std::abs(p->angle - kPi) < 1e-12) {
      n.angle = {Angle::Kind::kPi, 0.0};
    } else if (std::abs(p->angle - kPi / 2) < 1e-12) {
      n.angle = {Angle::Kind::kHalfPi, 0.0};
    } else {
      n.angle = {Angle::Kind::kDegrees, p->angle * 180.0 / kPi};
    }
    n.phase = phase_node(p->phase);
    if (!p->ideal && p->rabi != default_rabi) n.rabi_mhz = p->rabi / kMHz;
    return Item{n};
  }
  if (const auto* d = std::get_if<Delay>(&e)) {
    switch (d->symbol) {
      case DelaySymbol::kTauQuarter: return Item{DelayNode{DelayNode::Kind::kTauQuarter, 0.0}};
      case DelaySymbol::kTauHalf: return Item{DelayNode{DelayNode::Kind::kTauHalf, 0.0}};
      case DelaySymbol::kTau: return Item{DelayNode{DelayNode::Kind::kTau, 0.0}};
      case DelaySymbol::kNone: break;
    }
    return Item{DelayNode{DelayNode::Kind::kNs, d->duration * 1e9}};
  }
  const auto& c = std::get<Chirp>(e);
  return Item{ChirpNode{c.duration * 1e9, c.rabi / kMHz, c.detuning_start / kMHz,
                        c.detuning_end / kMHz, phase_node(c.phase)}};
}

}  // namespace

SeqAst parse(std::string_view text) {
  SeqAst ast = Parser(text).run();
  const std::string canonical = render(ast);
  if (canonical != text) {
    std::size_t at = 0;
    while (at < canonical.size() && at < text.size() && canonical[at] == text[at]) ++at;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, "text is not in canonical form (expected \"" +
                                    canonical + "\")");
  }
  return ast;
}

std::string render(const SeqAst& ast) {
  std::string out;
  render_items(out, ast.items);
  return out;
}

std::vector<Element> lower(const SeqAst& ast, const Bindings& b) {
  std::vector<Element> out;
  lower_items(ast.items, b, out);
  return out;
}

SeqAst to_ast(const PulseSequence& seq) {
  SeqAst ast;
  for (const auto& e : seq.prefix) ast.items.push_back(element_item(e, seq.rabi));
  const std::size_t m = seq.cycle.size();
  if (m > 0 && seq.repetitions > 0) {
    std::size_t period = m;
    for (std::size_t p = 1; p < m; ++p) {
      if (m % p != 0) continue;
      bool periodic = true;
      for (std::size_t k = p; k < m && periodic; ++k) {
        periodic = same_element(seq.cycle[k], seq.cycle[k - p]);
      }
      if (periodic) {
        period = p;
        break;
      }
    }
    Group g;
    for (std::size_t k = 0; k < period; ++k) {
      g.items.push_back(element_item(seq.cycle[k], seq.rabi));
    }
    g.exponent = static_cast<unsigned>(seq.repetitions * (m / period));
    ast.items.push_back(Item{std::move(g)});
  }
  for (const auto& e : seq.suffix) ast.items.push_back(element_item(e, seq.rabi));
  return ast;
}

}  // namespace pulsepol::dsl
