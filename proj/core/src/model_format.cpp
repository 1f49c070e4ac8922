#include "hbgfdi/model_format.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hbgfdi {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ModelError("line " + std::to_string(line) + ": " + msg);
}

// Splits a directive line into whitespace-separated fields, keeping quoted
// stretches (guard="...") intact.
std::vector<std::string> split_fields(const std::string& line, int lineno) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::string field;
    bool in_quotes = false;
    while (i < line.size() &&
           (in_quotes || !std::isspace(static_cast<unsigned char>(line[i])))) {
      if (line[i] == '"') {
        in_quotes = !in_quotes;
      } else {
        field += line[i];
      }
      ++i;
    }
    if (in_quotes) fail(lineno, "unterminated quote");
    out.push_back(std::move(field));
  }
  return out;
}

struct KeyValues {
  std::map<std::string, std::string> kv;
  const std::string* get(const std::string& key) const {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  }
};

KeyValues parse_kv(const std::vector<std::string>& fields, size_t from, int lineno) {
  KeyValues out;
  for (size_t i = from; i < fields.size(); ++i) {
    size_t eq = fields[i].find('=');
    if (eq == std::string::npos)
      fail(lineno, "expected key=value, got '" + fields[i] + "'");
    std::string key = fields[i].substr(0, eq);
    std::string val = fields[i].substr(eq + 1);
    if (!out.kv.emplace(key, val).second) fail(lineno, "duplicate key '" + key + "'");
  }
  return out;
}

double parse_real(const std::string& s, int lineno, const std::string& what) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(lineno, "invalid " + what + " '" + s + "'");
  }
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct PendingSensor {
  Element element;
  std::string junction;
  int lineno;
};

}  // namespace

BondGraph parse_model(const std::string& text) {
  BondGraph bg;
  std::vector<PendingSensor> sensors;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    size_t hash = raw.find('#');
    std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    std::vector<std::string> f = split_fields(line, lineno);
    if (f.empty()) continue;
    const std::string& directive = f[0];

    if (directive == "model") {
      if (f.size() != 2) fail(lineno, "usage: model <name>");
      bg.name = f[1];
    } else if (directive == "element") {
      if (f.size() < 3) fail(lineno, "usage: element <kind> <id> [key=value...]");
      if (f[1] == "TF" || f[1] == "GY")
        fail(lineno, "transformer/gyrator elements are not supported");
      auto kind = element_kind_from_string(f[1]);
      if (!kind) fail(lineno, "unknown element kind '" + f[1] + "'");
      if (*kind == ElementKind::Rs)
        fail(lineno, "Rs is reserved for derived diagnostic models");
      Element e;
      e.kind = *kind;
      e.id = f[2];
      KeyValues kv = parse_kv(f, 3, lineno);
      if (const std::string* p = kv.get("param")) e.param = *p;
      if (const std::string* v = kv.get("value"))
        e.value = parse_real(*v, lineno, "value");
      if (const std::string* s = kv.get("signal")) e.signal = *s;
      bg.elements.push_back(std::move(e));
    } else if (directive == "junction") {
      if (f.size() < 3) fail(lineno, "usage: junction <0|1> <id> [mode=...] [clamp=...]");
      Junction j;
      if (f[1] == "0") j.kind = JunctionKind::Zero;
      else if (f[1] == "1") j.kind = JunctionKind::One;
      else fail(lineno, "junction kind must be 0 or 1");
      j.id = f[2];
      KeyValues kv = parse_kv(f, 3, lineno);
      if (const std::string* m = kv.get("mode")) j.mode = *m;
      if (const std::string* c = kv.get("clamp")) {
        j.clamp = parse_real(*c, lineno, "clamp");
        j.has_clamp = true;
      }
      bg.junctions.push_back(std::move(j));
    } else if (directive == "bond") {
      if (f.size() < 2) fail(lineno, "usage: bond <id> from=<node> to=<node>");
      Bond b;
      try {
        b.id = std::stoi(f[1]);
      } catch (const std::exception&) {
        fail(lineno, "invalid bond id '" + f[1] + "'");
      }
      KeyValues kv = parse_kv(f, 2, lineno);
      const std::string* from = kv.get("from");
      const std::string* to = kv.get("to");
      if (!from || !to) fail(lineno, "bond requires from= and to=");
      b.tail = *from;
      b.head = *to;
      bg.bonds.push_back(std::move(b));
    } else if (directive == "mode") {
      if (f.size() < 2) fail(lineno, "usage: mode <name> [guard=\"...\"]");
      ModeSignal m;
      m.name = f[1];
      KeyValues kv = parse_kv(f, 2, lineno);
      if (const std::string* g = kv.get("guard")) {
        try {
          m.guard = parse_guard(*g);
        } catch (const ModelError& e) {
          fail(lineno, e.what());
        }
      }
      bg.mode_signals.push_back(std::move(m));
    } else if (directive == "sensor") {
      if (f.size() < 3) fail(lineno, "usage: sensor <De|Df> <id> at=<junction> signal=<name>");
      auto kind = element_kind_from_string(f[1]);
      if (!kind || (*kind != ElementKind::De && *kind != ElementKind::Df))
        fail(lineno, "sensor kind must be De or Df");
      PendingSensor ps;
      ps.element.kind = *kind;
      ps.element.id = f[2];
      KeyValues kv = parse_kv(f, 3, lineno);
      const std::string* at = kv.get("at");
      const std::string* sig = kv.get("signal");
      if (!at || !sig) fail(lineno, "sensor requires at= and signal=");
      ps.junction = *at;
      ps.element.signal = *sig;
      ps.lineno = lineno;
      sensors.push_back(std::move(ps));
    } else {
      fail(lineno, "unknown directive '" + directive + "'");
    }
  }

  int next_id = bg.max_bond_id();
  for (PendingSensor& ps : sensors) {
    if (!bg.find_junction(ps.junction))
      fail(ps.lineno, "sensor attaches to unknown junction '" + ps.junction + "'");
    bg.elements.push_back(ps.element);
    bg.bonds.push_back({++next_id, ps.junction, ps.element.id});
  }

  std::vector<Diagnostic> diags = validate(bg);
  if (!diags.empty()) {
    std::string msg = "invalid model:";
    for (const Diagnostic& d : diags) msg += "\n  " + d.subject + ": " + d.message;
    throw ModelError(msg);
  }
  return bg;
}

BondGraph load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string render_model(const BondGraph& bg) {
  std::ostringstream out;
  if (!bg.name.empty()) out << "model " << bg.name << "\n";

  // Detector elements attached through a trailing auto-assigned bond render
  // back as sensor lines; everything else as plain elements/bonds.
  std::set<std::string> sensor_ids;
  std::set<int> sensor_bonds;
  struct SensorLine { const Element* e; std::string junction; int bond_id; };
  std::vector<SensorLine> sensor_lines;
  for (const Element& e : bg.elements) {
    if (!e.is_sensor()) continue;
    auto incident = bg.bonds_at(e.id);
    if (incident.size() != 1) continue;
    const Bond* b = incident[0];
    const std::string& other = b->tail == e.id ? b->head : b->tail;
    if (!bg.find_junction(other)) continue;
    sensor_ids.insert(e.id);
    sensor_bonds.insert(b->id);
    sensor_lines.push_back({&e, other, b->id});
  }

  for (const Element& e : bg.elements) {
    if (sensor_ids.count(e.id)) continue;
    out << "element " << to_string(e.kind) << " " << e.id;
    if (!e.param.empty()) out << " param=" << e.param;
    if (!e.is_source() && !e.is_sensor()) out << " value=" << format_real(e.value);
    if (!e.signal.empty()) out << " signal=" << e.signal;
    out << "\n";
  }
  for (const Junction& j : bg.junctions) {
    out << "junction " << (j.kind == JunctionKind::Zero ? "0" : "1") << " " << j.id;
    if (j.controlled()) out << " mode=" << j.mode;
    if (j.has_clamp) out << " clamp=" << format_real(j.clamp);
    out << "\n";
  }
  for (const Bond& b : bg.bonds) {
    if (sensor_bonds.count(b.id)) continue;
    out << "bond " << b.id << " from=" << b.tail << " to=" << b.head << "\n";
  }
  for (const ModeSignal& m : bg.mode_signals) {
    out << "mode " << m.name;
    if (m.guard) out << " guard=\"" << guard_render(m.guard) << "\"";
    out << "\n";
  }
  for (const SensorLine& s : sensor_lines) {
    out << "sensor " << to_string(s.e->kind) << " " << s.e->id << " at=" << s.junction
        << " signal=" << s.e->signal << "\n";
  }
  return out.str();
}

std::string builtin_three_tank_text() { return render_model(builtin_three_tank()); }

}  // namespace hbgfdi
