#pragma once

// Boolean conditions over mode switches, as they appear in fault signature
// matrix cells: 0, 1, a single switch, a product of switches, or a
// disjunction of such products. Guard-derived conditions are always a
// positive DNF; isolability conditions may instead enumerate explicit modes
// when no positive form exists.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hbgfdi {

using ModeVector = std::map<std::string, int>;  // alpha name -> 0/1

class ModeCondition {
public:
  /// Constant false (0).
  ModeCondition() = default;

  static ModeCondition always();                          // 1
  static ModeCondition never();                           // 0
  static ModeCondition of(const std::string& alpha);      // a single switch
  static ModeCondition monomial(std::set<std::string> alphas);

  /// Exact representation of an explicit satisfying-mode set over the given
  /// switch names. Uses a minimal positive DNF when one exists, otherwise
  /// stores the mode list itself.
  static ModeCondition from_modes(const std::vector<ModeVector>& satisfied,
                                  const std::vector<std::string>& alphas);

  /// Disjunction with a positive monomial (absorbing redundant terms).
  void add_monomial(const std::set<std::string>& alphas);
  void add(const ModeCondition& other);

  bool is_false() const;
  bool is_true() const;
  bool evaluate(const ModeVector& mode) const;

  /// Semantic equality over the union of referenced switch names.
  bool equivalent(const ModeCondition& other) const;

  /// "0", "1", "a1", "a1*a2", "a1|a2", or "modes{11,10}" for non-positive
  /// mode-list conditions.
  std::string render() const;

  std::set<std::string> alphas() const;

private:
  // Positive DNF: set of monomials; each monomial a set of alpha names.
  // The empty monomial is "true" and absorbs all others.
  std::set<std::set<std::string>> terms_;
  // Fallback exact representation when no positive DNF exists.
  std::optional<std::vector<ModeVector>> mode_list_;
};

/// Modes in conventional order for k switches: all-on first, all-off last,
/// with the first switch as the most significant bit.
std::vector<ModeVector> enumerate_modes(const std::vector<std::string>& alphas);

}  // namespace hbgfdi
