#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pulsepol/sequence.hpp"

namespace pulsepol::dsl {

struct Angle {
  enum class Kind { kPi, kHalfPi, kDegrees };
  Kind kind = Kind::kPi;
  double degrees = 0.0;  // used for kDegrees
  bool operator==(const Angle&) const = default;
};

struct Phase {
  enum class Kind { kX, kY, kMinusX, kMinusY, kDegrees };
  Kind kind = Kind::kX;
  double degrees = 0.0;  // used for kDegrees
  bool operator==(const Phase&) const = default;
};

struct PulseNode {
  Angle angle;
  Phase phase;
  std::optional<double> rabi_mhz;  // overrides the bound Ω₀
  bool operator==(const PulseNode&) const = default;
};

struct DelayNode {
  enum class Kind { kTauQuarter, kTauHalf, kTau, kNs };
  Kind kind = Kind::kTauQuarter;
  double ns = 0.0;  // used for kNs
  bool operator==(const DelayNode&) const = default;
};

struct ChirpNode {
  double duration_ns = 0.0;
  double rabi_mhz = 0.0;
  double start_mhz = 0.0;
  double end_mhz = 0.0;
  Phase phase;
  bool operator==(const ChirpNode&) const = default;
};

struct Item;

struct Group {
  std::vector<Item> items;
  unsigned exponent = 1;
  bool operator==(const Group&) const;
};

struct Item {
  std::variant<PulseNode, DelayNode, ChirpNode, Group> node;
  bool operator==(const Item&) const = default;
};

struct SeqAst {
  std::vector<Item> items;
  bool operator==(const SeqAst&) const = default;
};

/// Parses the sequence text format. Grammar (tokens separated by single
/// spaces, nothing else):
///
///   seq    := item*
///   item   := pulse | delay | chirp | group
///   group  := "[" item+ "]^" INT
///   pulse  := "(" angle ")_" phase [ "@" FLOAT "MHz" ]
///   angle  := "pi" | "pi/2" | FLOAT "deg"
///   phase  := ["-"] ("X" | "Y") | FLOAT "deg"
///   delay  := "~" ( "tau/4" | "tau/2" | "tau" | FLOAT "ns" )
///   chirp  := "chirp(" FLOAT "ns," FLOAT "MHz," FLOAT "MHz," FLOAT "MHz)_" phase
///
/// Only canonical text (exactly what render() produces) is accepted.
/// Throws ParseError with 1-based line and column.
SeqAst parse(std::string_view text);

/// Canonical text for an AST.
std::string render(const SeqAst& ast);

struct Bindings {
  double tau = 0.0;    // s; needed for symbolic delays
  double rabi = 0.0;   // Ω₀, rad/s; used by pulses without an override
  bool ideal = false;  // lower pulses as δ-pulses
};

/// Expands groups and converts to library units.
std::vector<Element> lower(const SeqAst& ast, const Bindings& b);

/// Describes a built sequence. The repeated cycle is written as a group,
/// folded to its shortest period; delays with a τ symbol stay symbolic.
SeqAst to_ast(const PulseSequence& seq);

}  // namespace pulsepol::dsl
