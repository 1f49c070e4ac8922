#pragma once

// Sequential causality assignment for hybrid bond graphs and the diagnostic
// transformation that yields a single derivative-causality assignment valid
// in every operating mode.
//
// Orientation convention: each bond records which endpoint determines its
// effort variable; the opposite endpoint determines the flow. A 0-junction
// admits exactly one bond whose effort is determined by the far side; a
// 1-junction admits exactly one bond whose effort it determines itself.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hbgfdi/bondgraph.hpp"
#include "hbgfdi/mode_condition.hpp"

namespace hbgfdi {

enum class EffortSource { Tail, Head };

enum class Provenance {
  SourceFixed,
  StoragePreferred,
  ControlledJunctionPreferred,
  JunctionPropagated,
  Indifferent,
};

std::string to_string(Provenance p);

struct CausalAssignment {
  std::map<int, EffortSource> orientation;
  std::map<int, Provenance> provenance;

  /// The node id that determines the bond's effort.
  std::string effort_side(const Bond& b) const;
  /// True when the far endpoint (seen from node_id) determines the effort.
  bool effort_into(const Bond& b, const std::string& node_id) const;
};

enum class StoragePreference { Integral, Derivative };
enum class StorageCausality { Integral, Derivative };

/// Sequential assignment. Phases: controlled junctions take their preferred
/// pattern (an attached R in conductive causality determines the junction
/// variable), then sources and detectors fix their bonds, then storages take
/// the preferred causality where still free, then junction constraints
/// propagate to a fixpoint, and any remaining choice goes to the lowest
/// bond id. Conflicts raise CausalConflictError; there is no backtracking.
CausalAssignment scap_assign(const BondGraph& bg, StoragePreference pref);

/// Per-storage causality implied by an assignment.
std::map<std::string, StorageCausality> storage_causalities(const BondGraph& bg,
                                                            const CausalAssignment& ca);

/// Checks junction and fixed-element consistency; OFF switched junctions
/// have their own constraint waived. Returns diagnostics, empty when valid.
std::vector<Diagnostic> check_assignment(const BondGraph& bg, const CausalAssignment& ca,
                                         const ModeVectorMap& mode);

using ModeVectorMap = std::map<std::string, int>;

struct Dhbg {
  BondGraph graph;  // with retained virtual sensor resistances inserted
  CausalAssignment assignment;
  std::set<std::string> retained_rs;
  std::map<std::string, StorageCausality> storage_causality;
};

/// Three-step diagnostic transformation: insert a virtual high resistance at
/// every sensor junction, assign causality with derivative preference, then
/// drop each inserted resistance left in indifferent (conductive) causality.
/// The resulting assignment is verified against every mode vector.
Dhbg derive_dhbg(const BondGraph& bg);

/// Annotated model rendering: the model file plus one
/// `causality <bond-id> <head|tail>` line per bond (the endpoint that
/// determines the effort).
std::string render_dhbg(const Dhbg& d);

class CausalConflictError : public std::runtime_error {
public:
  CausalConflictError(std::string junction, std::vector<int> bonds, const std::string& msg)
      : std::runtime_error(msg), junction_id(std::move(junction)), bond_ids(std::move(bonds)) {}
  std::string junction_id;
  std::vector<int> bond_ids;
};

}  // namespace hbgfdi
