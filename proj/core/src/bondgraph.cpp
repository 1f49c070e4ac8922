#include "hbgfdi/bondgraph.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace hbgfdi {

std::string to_string(ElementKind k) {
  switch (k) {
    case ElementKind::Se: return "Se";
    case ElementKind::Sf: return "Sf";
    case ElementKind::C: return "C";
    case ElementKind::I: return "I";
    case ElementKind::R: return "R";
    case ElementKind::De: return "De";
    case ElementKind::Df: return "Df";
    case ElementKind::Rs: return "Rs";
  }
  return "?";
}

std::optional<ElementKind> element_kind_from_string(const std::string& s) {
  if (s == "Se") return ElementKind::Se;
  if (s == "Sf") return ElementKind::Sf;
  if (s == "C") return ElementKind::C;
  if (s == "I") return ElementKind::I;
  if (s == "R") return ElementKind::R;
  if (s == "De") return ElementKind::De;
  if (s == "Df") return ElementKind::Df;
  if (s == "Rs") return ElementKind::Rs;
  return std::nullopt;
}

GuardPtr GuardExpr::cmp(std::string signal, Op op, double threshold) {
  auto g = std::make_shared<GuardExpr>();
  g->kind = Kind::Cmp;
  g->signal = std::move(signal);
  g->op = op;
  g->threshold = threshold;
  return g;
}

GuardPtr GuardExpr::conj(GuardPtr a, GuardPtr b) {
  auto g = std::make_shared<GuardExpr>();
  g->kind = Kind::And;
  g->lhs = std::move(a);
  g->rhs = std::move(b);
  return g;
}

GuardPtr GuardExpr::disj(GuardPtr a, GuardPtr b) {
  auto g = std::make_shared<GuardExpr>();
  g->kind = Kind::Or;
  g->lhs = std::move(a);
  g->rhs = std::move(b);
  return g;
}

bool guard_eval(const GuardPtr& g, const std::map<std::string, double>& signals) {
  if (!g) throw ModelError("guard_eval: empty guard");
  switch (g->kind) {
    case GuardExpr::Kind::Cmp: {
      auto it = signals.find(g->signal);
      if (it == signals.end())
        throw ModelError("guard references unknown signal: " + g->signal);
      double x = it->second;
      switch (g->op) {
        case GuardExpr::Op::Ge: return x >= g->threshold;
        case GuardExpr::Op::Gt: return x > g->threshold;
        case GuardExpr::Op::Le: return x <= g->threshold;
        case GuardExpr::Op::Lt: return x < g->threshold;
      }
      return false;
    }
    case GuardExpr::Kind::And:
      return guard_eval(g->lhs, signals) && guard_eval(g->rhs, signals);
    case GuardExpr::Kind::Or:
      return guard_eval(g->lhs, signals) || guard_eval(g->rhs, signals);
  }
  return false;
}

namespace {

std::string format_threshold(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string guard_render_prec(const GuardPtr& g, bool parenthesize_or) {
  switch (g->kind) {
    case GuardExpr::Kind::Cmp: {
      const char* op = g->op == GuardExpr::Op::Ge   ? ">="
                       : g->op == GuardExpr::Op::Gt ? ">"
                       : g->op == GuardExpr::Op::Le ? "<="
                                                    : "<";
      return g->signal + " " + op + " " + format_threshold(g->threshold);
    }
    case GuardExpr::Kind::And:
      return guard_render_prec(g->lhs, true) + " && " + guard_render_prec(g->rhs, true);
    case GuardExpr::Kind::Or: {
      std::string s = guard_render_prec(g->lhs, false) + " || " +
                      guard_render_prec(g->rhs, false);
      return parenthesize_or ? "(" + s + ")" : s;
    }
  }
  return "";
}

// Minimal recursive-descent parser: cmp := ident op number;
// and-expr := atom (&& atom)*; or-expr := and-expr (|| and-expr)*.
struct GuardParser {
  const std::string& s;
  size_t i = 0;

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }

  bool accept(const std::string& tok) {
    skip();
    if (s.compare(i, tok.size(), tok) == 0) {
      i += tok.size();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ModelError("guard parse error at offset " + std::to_string(i) + ": " + msg);
  }

  GuardPtr parse_or() {
    GuardPtr lhs = parse_and();
    while (accept("||")) lhs = GuardExpr::disj(lhs, parse_and());
    return lhs;
  }

  GuardPtr parse_and() {
    GuardPtr lhs = parse_atom();
    while (accept("&&")) lhs = GuardExpr::conj(lhs, parse_atom());
    return lhs;
  }

  GuardPtr parse_atom() {
    skip();
    if (accept("(")) {
      GuardPtr g = parse_or();
      if (!accept(")")) fail("expected ')'");
      return g;
    }
    size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
      ++i;
    if (i == start) fail("expected signal name");
    std::string name = s.substr(start, i - start);
    GuardExpr::Op op;
    if (accept(">=")) op = GuardExpr::Op::Ge;
    else if (accept("<=")) op = GuardExpr::Op::Le;
    else if (accept(">")) op = GuardExpr::Op::Gt;
    else if (accept("<")) op = GuardExpr::Op::Lt;
    else fail("expected comparison operator");
    skip();
    size_t num_start = i;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.' ||
                            s[i] == '-' || s[i] == '+' || s[i] == 'e' || s[i] == 'E'))
      ++i;
    if (i == num_start) fail("expected threshold constant");
    double threshold = std::stod(s.substr(num_start, i - num_start));
    return GuardExpr::cmp(std::move(name), op, threshold);
  }
};

}  // namespace

std::string guard_render(const GuardPtr& g) { return guard_render_prec(g, false); }

GuardPtr parse_guard(const std::string& text) {
  GuardParser p{text};
  GuardPtr g = p.parse_or();
  p.skip();
  if (p.i != text.size()) p.fail("trailing input");
  return g;
}

const Element* BondGraph::find_element(const std::string& id) const {
  for (const Element& e : elements)
    if (e.id == id) return &e;
  return nullptr;
}

const Junction* BondGraph::find_junction(const std::string& id) const {
  for (const Junction& j : junctions)
    if (j.id == id) return &j;
  return nullptr;
}

const ModeSignal* BondGraph::find_mode(const std::string& name) const {
  for (const ModeSignal& m : mode_signals)
    if (m.name == name) return &m;
  return nullptr;
}

const Bond* BondGraph::find_bond(int id) const {
  for (const Bond& b : bonds)
    if (b.id == id) return &b;
  return nullptr;
}

bool BondGraph::has_node(const std::string& id) const {
  return find_element(id) != nullptr || find_junction(id) != nullptr;
}

std::vector<const Bond*> BondGraph::bonds_at(const std::string& node_id) const {
  std::vector<const Bond*> out;
  for (const Bond& b : bonds)
    if (b.tail == node_id || b.head == node_id) out.push_back(&b);
  std::sort(out.begin(), out.end(),
            [](const Bond* a, const Bond* b) { return a->id < b->id; });
  return out;
}

const Element* BondGraph::sensor_at(const std::string& junction_id) const {
  const Junction* j = find_junction(junction_id);
  if (!j) return nullptr;
  ElementKind want = j->kind == JunctionKind::Zero ? ElementKind::De : ElementKind::Df;
  for (const Bond* b : bonds_at(junction_id)) {
    const std::string& other = b->tail == junction_id ? b->head : b->tail;
    const Element* e = find_element(other);
    if (e && e->kind == want) return e;
  }
  return nullptr;
}

int BondGraph::max_bond_id() const {
  int m = 0;
  for (const Bond& b : bonds) m = std::max(m, b.id);
  return m;
}

bool operator==(const Element& a, const Element& b) {
  return a.kind == b.kind && a.id == b.id && a.param == b.param && a.value == b.value &&
         a.signal == b.signal;
}
bool operator==(const Junction& a, const Junction& b) {
  return a.kind == b.kind && a.id == b.id && a.mode == b.mode &&
         a.has_clamp == b.has_clamp && (!a.has_clamp || a.clamp == b.clamp);
}
bool operator==(const Bond& a, const Bond& b) {
  return a.id == b.id && a.tail == b.tail && a.head == b.head;
}
bool operator==(const ModeSignal& a, const ModeSignal& b) {
  if (a.name != b.name) return false;
  if (static_cast<bool>(a.guard) != static_cast<bool>(b.guard)) return false;
  if (a.guard && guard_render(a.guard) != guard_render(b.guard)) return false;
  return true;
}
bool operator==(const BondGraph& a, const BondGraph& b) {
  return a.name == b.name && a.elements == b.elements && a.junctions == b.junctions &&
         a.bonds == b.bonds && a.mode_signals == b.mode_signals;
}

namespace {

void collect_guard_signals(const GuardPtr& g, std::set<std::string>& out) {
  if (!g) return;
  if (g->kind == GuardExpr::Kind::Cmp) {
    out.insert(g->signal);
    return;
  }
  collect_guard_signals(g->lhs, out);
  collect_guard_signals(g->rhs, out);
}

}  // namespace

std::vector<Diagnostic> validate(const BondGraph& bg) {
  std::vector<Diagnostic> out;
  std::set<std::string> node_ids;
  for (const Element& e : bg.elements) {
    if (!node_ids.insert(e.id).second)
      out.push_back({e.id, "duplicate node id"});
  }
  for (const Junction& j : bg.junctions) {
    if (!node_ids.insert(j.id).second)
      out.push_back({j.id, "duplicate node id"});
  }

  std::set<int> bond_ids;
  std::map<std::string, int> incidence;
  for (const Bond& b : bg.bonds) {
    std::string bid = "bond " + std::to_string(b.id);
    if (!bond_ids.insert(b.id).second) out.push_back({bid, "duplicate bond id"});
    for (const std::string& end : {b.tail, b.head}) {
      if (!bg.has_node(end))
        out.push_back({bid, "dangling reference to unknown node '" + end + "'"});
      else
        ++incidence[end];
    }
    if (b.tail == b.head) out.push_back({bid, "bond connects a node to itself"});
  }

  std::set<std::string> params;
  std::set<std::string> sensor_signals;
  for (const Element& e : bg.elements) {
    int inc = incidence.count(e.id) ? incidence.at(e.id) : 0;
    if (inc != 1)
      out.push_back({e.id, "one-port element must have exactly one incident bond, has " +
                               std::to_string(inc)});
    if (e.is_source() || e.is_sensor()) {
      if (e.signal.empty()) out.push_back({e.id, "source/detector requires a signal name"});
      if (!e.param.empty()) out.push_back({e.id, "source/detector carries a signal, not a parameter"});
      if (e.is_sensor()) sensor_signals.insert(e.signal);
    } else {
      if (e.param.empty()) out.push_back({e.id, "element requires a parameter name"});
      else if (!params.insert(e.param).second)
        out.push_back({e.id, "duplicate parameter name '" + e.param + "'"});
    }
  }

  std::set<std::string> mode_names;
  for (const ModeSignal& m : bg.mode_signals) {
    if (!mode_names.insert(m.name).second)
      out.push_back({m.name, "duplicate mode signal"});
    if (m.guard) {
      std::set<std::string> used;
      collect_guard_signals(m.guard, used);
      for (const std::string& s : used) {
        if (!sensor_signals.count(s))
          out.push_back({m.name, "guard references non-detector signal '" + s + "'"});
      }
    }
  }

  for (const Junction& j : bg.junctions) {
    int inc = incidence.count(j.id) ? incidence.at(j.id) : 0;
    if (inc < 2)
      out.push_back({j.id, "junction must have at least two incident bonds, has " +
                               std::to_string(inc)});
    if (j.controlled() && !bg.find_mode(j.mode))
      out.push_back({j.id, "controlled junction references unknown mode '" + j.mode + "'"});
  }
  return out;
}

BondGraph builtin_three_tank() {
  BondGraph bg;
  bg.name = "three-tank";
  bg.elements = {
      {ElementKind::Sf, "Sf1", "", 0.0, "Qp1"},
      {ElementKind::Sf, "Sf2", "", 0.0, "Qp2"},
      {ElementKind::C, "c1", "C1", 1.0, ""},
      {ElementKind::C, "c2", "C2", 1.0, ""},
      {ElementKind::C, "c3", "C3", 1.0, ""},
      {ElementKind::R, "R1", "R1", 1.0, ""},
      {ElementKind::R, "R12", "R12", 1.0, ""},
      {ElementKind::R, "R23", "R23", 1.0, ""},
      {ElementKind::R, "R2", "R2", 1.0, ""},
      {ElementKind::De, "De1", "", 0.0, "De1"},
      {ElementKind::De, "De2", "", 0.0, "De2"},
      {ElementKind::De, "De3", "", 0.0, "De3"},
  };
  bg.junctions = {
      {JunctionKind::Zero, "01", "", 0.0, false},
      {JunctionKind::Zero, "02", "", 0.0, false},
      {JunctionKind::Zero, "03", "", 0.0, false},
      {JunctionKind::One, "1c1", "a1", 0.5, true},
      {JunctionKind::One, "1c2", "a2", 0.7, true},
  };
  // Bond 8 is reserved for the virtual sensor resistance the diagnostic
  // transformation inserts at the middle tank junction.
  bg.bonds = {
      {1, "Sf1", "01"},  {2, "01", "c1"},   {3, "01", "R1"},  {4, "01", "1c1"},
      {5, "1c1", "R12"}, {6, "1c1", "02"},  {7, "02", "c2"},  {9, "02", "1c2"},
      {10, "1c2", "R23"}, {11, "1c2", "03"}, {12, "03", "c3"}, {13, "03", "R2"},
      {14, "Sf2", "03"}, {15, "01", "De1"}, {16, "02", "De2"}, {17, "03", "De3"},
  };
  bg.mode_signals = {
      {"a1", parse_guard("De1 >= 0.5 || De2 >= 0.5")},
      {"a2", parse_guard("De2 >= 0.7 || De3 >= 0.7")},
  };
  return bg;
}

}  // namespace hbgfdi
