#pragma once

// Hybrid bond graph substrate: one-port elements, 0/1 junctions (optionally
// switched by a boolean mode signal), power bonds, effort/flow detectors and
// guard predicates over measured signals. Values are immutable after
// construction and safe to share across concurrent readers.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hbgfdi {

enum class ElementKind { Se, Sf, C, I, R, De, Df, Rs };

std::string to_string(ElementKind k);
std::optional<ElementKind> element_kind_from_string(const std::string& s);

struct Element {
  ElementKind kind;
  std::string id;
  std::string param;   // C/I/R/Rs: parameter symbol
  double value = 0.0;  // C/I/R/Rs: nominal parameter value
  std::string signal;  // Se/Sf/De/Df: signal name

  bool is_source() const { return kind == ElementKind::Se || kind == ElementKind::Sf; }
  bool is_storage() const { return kind == ElementKind::C || kind == ElementKind::I; }
  bool is_sensor() const { return kind == ElementKind::De || kind == ElementKind::Df; }
};

enum class JunctionKind { Zero, One };

struct Junction {
  JunctionKind kind;
  std::string id;
  std::string mode;     // controlling mode signal name, empty if plain
  double clamp = 0.0;   // pipe elevation for switched couplings
  bool has_clamp = false;

  bool controlled() const { return !mode.empty(); }
};

struct Bond {
  int id = 0;
  std::string tail;  // power flows tail -> head; sign +1 into head
  std::string head;

  std::string effort_var() const { return "e" + std::to_string(id); }
  std::string flow_var() const { return "f" + std::to_string(id); }
};

// ---------------------------------------------------------------------------
// Guard predicates: comparisons of measured signals against constants,
// combined with && and ||.

struct GuardExpr;
using GuardPtr = std::shared_ptr<const GuardExpr>;

struct GuardExpr {
  enum class Kind { Cmp, And, Or } kind;
  // Cmp
  std::string signal;
  enum class Op { Ge, Gt, Le, Lt } op = Op::Ge;
  double threshold = 0.0;
  // And/Or
  GuardPtr lhs, rhs;

  static GuardPtr cmp(std::string signal, Op op, double threshold);
  static GuardPtr conj(GuardPtr a, GuardPtr b);
  static GuardPtr disj(GuardPtr a, GuardPtr b);
};

bool guard_eval(const GuardPtr& g, const std::map<std::string, double>& signals);
std::string guard_render(const GuardPtr& g);
GuardPtr parse_guard(const std::string& text);  // throws ModelError

struct ModeSignal {
  std::string name;   // e.g. a1
  GuardPtr guard;     // empty = externally supplied flag
};

struct BondGraph {
  std::string name;
  std::vector<Element> elements;
  std::vector<Junction> junctions;
  std::vector<Bond> bonds;
  std::vector<ModeSignal> mode_signals;

  const Element* find_element(const std::string& id) const;
  const Junction* find_junction(const std::string& id) const;
  const ModeSignal* find_mode(const std::string& name) const;
  const Bond* find_bond(int id) const;
  bool has_node(const std::string& id) const;

  /// Bonds incident to a node id, in ascending bond id order.
  std::vector<const Bond*> bonds_at(const std::string& node_id) const;

  /// Sensor element attached to the junction (De on a 0-junction, Df on a
  /// 1-junction), if any.
  const Element* sensor_at(const std::string& junction_id) const;

  int max_bond_id() const;
};

bool operator==(const Element& a, const Element& b);
bool operator==(const Junction& a, const Junction& b);
bool operator==(const Bond& a, const Bond& b);
bool operator==(const ModeSignal& a, const ModeSignal& b);
bool operator==(const BondGraph& a, const BondGraph& b);

struct Diagnostic {
  std::string subject;  // offending id
  std::string message;
};

/// Structural validation; empty result means every invariant holds.
std::vector<Diagnostic> validate(const BondGraph& bg);

/// The three coupled tanks benchmark: two pumps, three level-sensed tank
/// capacities, two drain resistances and two switched coupling valves with
/// pipe elevations 0.5 m and 0.7 m. All parameters default to 1.
BondGraph builtin_three_tank();

class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace hbgfdi
