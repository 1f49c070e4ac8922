#include "hbgfdi/mode_condition.hpp"

#include <algorithm>

namespace hbgfdi {

ModeCondition ModeCondition::always() {
  ModeCondition c;
  c.terms_.insert(std::set<std::string>{});
  return c;
}

ModeCondition ModeCondition::never() { return ModeCondition{}; }

ModeCondition ModeCondition::of(const std::string& alpha) {
  ModeCondition c;
  c.terms_.insert(std::set<std::string>{alpha});
  return c;
}

ModeCondition ModeCondition::monomial(std::set<std::string> alphas) {
  ModeCondition c;
  c.terms_.insert(std::move(alphas));
  return c;
}

void ModeCondition::add_monomial(const std::set<std::string>& alphas) {
  mode_list_.reset();
  // Absorption: drop any existing superset terms; skip if a subset exists.
  for (const auto& t : terms_) {
    if (std::includes(alphas.begin(), alphas.end(), t.begin(), t.end())) return;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::includes(it->begin(), it->end(), alphas.begin(), alphas.end()))
      it = terms_.erase(it);
    else
      ++it;
  }
  terms_.insert(alphas);
}

void ModeCondition::add(const ModeCondition& other) {
  for (const auto& t : other.terms_) add_monomial(t);
}

bool ModeCondition::is_false() const { return terms_.empty() && !mode_list_; }

bool ModeCondition::is_true() const {
  return terms_.size() == 1 && terms_.begin()->empty();
}

bool ModeCondition::evaluate(const ModeVector& mode) const {
  if (mode_list_) {
    for (const ModeVector& m : *mode_list_) {
      bool match = true;
      for (const auto& [a, v] : m) {
        auto it = mode.find(a);
        if (it == mode.end() || it->second != v) {
          match = false;
          break;
        }
      }
      if (match) return true;
    }
    return false;
  }
  for (const auto& t : terms_) {
    bool all = true;
    for (const std::string& a : t) {
      auto it = mode.find(a);
      if (it == mode.end() || it->second != 1) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

std::set<std::string> ModeCondition::alphas() const {
  std::set<std::string> out;
  if (mode_list_) {
    for (const ModeVector& m : *mode_list_)
      for (const auto& [a, _] : m) out.insert(a);
    return out;
  }
  for (const auto& t : terms_) out.insert(t.begin(), t.end());
  return out;
}

bool ModeCondition::equivalent(const ModeCondition& other) const {
  std::set<std::string> names = alphas();
  for (const std::string& a : other.alphas()) names.insert(a);
  std::vector<std::string> vars(names.begin(), names.end());
  for (const ModeVector& m : enumerate_modes(vars)) {
    if (evaluate(m) != other.evaluate(m)) return false;
  }
  return true;
}

std::string ModeCondition::render() const {
  if (mode_list_) {
    std::string out = "modes{";
    bool first_mode = true;
    for (const ModeVector& m : *mode_list_) {
      if (!first_mode) out += ",";
      first_mode = false;
      for (const auto& [_, v] : m) out += v ? "1" : "0";
    }
    return out + "}";
  }
  if (terms_.empty()) return "0";
  if (is_true()) return "1";
  std::string out;
  bool first_term = true;
  for (const auto& t : terms_) {
    if (!first_term) out += "|";
    first_term = false;
    bool first_a = true;
    for (const std::string& a : t) {
      if (!first_a) out += "*";
      first_a = false;
      out += a;
    }
  }
  return out;
}

ModeCondition ModeCondition::from_modes(const std::vector<ModeVector>& satisfied,
                                        const std::vector<std::string>& alphas) {
  // Candidate monomials whose satisfied set is contained in the target.
  auto in_target = [&](const ModeVector& m) {
    for (const ModeVector& s : satisfied)
      if (s == m) return true;
    return false;
  };
  std::vector<ModeVector> all = enumerate_modes(alphas);
  ModeCondition dnf;
  size_t n = alphas.size();
  for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
    std::set<std::string> mono;
    for (size_t i = 0; i < n; ++i)
      if (mask & (size_t{1} << i)) mono.insert(alphas[i]);
    ModeCondition cand = ModeCondition::monomial(mono);
    bool contained = true;
    for (const ModeVector& m : all) {
      if (cand.evaluate(m) && !in_target(m)) {
        contained = false;
        break;
      }
    }
    if (contained) dnf.add_monomial(mono);
  }
  bool exact = true;
  for (const ModeVector& m : all) {
    if (dnf.evaluate(m) != in_target(m)) {
      exact = false;
      break;
    }
  }
  if (exact) return dnf;
  ModeCondition c;
  c.mode_list_ = satisfied;
  return c;
}

std::vector<ModeVector> enumerate_modes(const std::vector<std::string>& alphas) {
  std::vector<ModeVector> out;
  size_t n = alphas.size();
  for (size_t k = (size_t{1} << n); k-- > 0;) {
    ModeVector m;
    for (size_t i = 0; i < n; ++i) {
      size_t bit = n - 1 - i;
      m[alphas[i]] = (k >> bit) & 1 ? 1 : 0;
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace hbgfdi
