#include "platoon/milp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "platoon/errors.hpp"
#include "platoon/solution.hpp"

namespace platoon {

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

double round9(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(num(x).c_str(), nullptr);
}

std::string join_name(const char* symbol, std::initializer_list<std::size_t> idx) {
  std::string s = symbol;
  for (std::size_t i : idx) {
    s += '_';
    s += std::to_string(i);
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------- model

std::size_t MilpModel::add_variable(std::string name, VarKind kind, double lower, double upper) {
  auto [it, inserted] = index_.emplace(name, variables.size());
  if (!inserted) throw InputError(ErrorCode::schema, "duplicate variable " + name);
  variables.push_back(Variable{std::move(name), kind, lower, upper});
  return it->second;
}

std::optional<std::size_t> MilpModel::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t MilpModel::at(const std::string& name) const {
  auto i = find(name);
  if (!i) throw InputError(ErrorCode::schema, "unknown variable " + name);
  return *i;
}

double MilpModel::objective_value(const std::vector<double>& x) const {
  double total = 0.0;
  for (const auto& [v, c] : objective) total += c * x.at(v);
  return total;
}

std::vector<std::string> MilpModel::violations(const std::vector<double>& x, double tol) const {
  std::vector<std::string> out;
  for (std::size_t v = 0; v < variables.size(); ++v) {
    const Variable& var = variables[v];
    const double value = x.at(v);
    if (value < var.lower - tol || value > var.upper + tol) out.push_back("bound:" + var.name);
    if (var.kind == VarKind::binary && std::min(std::abs(value), std::abs(value - 1.0)) > tol) {
      out.push_back("integrality:" + var.name);
    }
  }
  for (const Constraint& c : constraints) {
    double lhs = 0.0;
    for (const auto& [v, coef] : c.terms) lhs += coef * x.at(v);
    // Scale the tolerance with the row magnitude; big-M rows carry large
    // coefficients.
    double scale = std::max(1.0, std::abs(c.rhs));
    for (const auto& [v, coef] : c.terms) scale = std::max(scale, std::abs(coef * x.at(v)));
    const double t = tol * scale;
    bool ok = true;
    switch (c.sense) {
      case Sense::le: ok = lhs <= c.rhs + t; break;
      case Sense::ge: ok = lhs >= c.rhs - t; break;
      case Sense::eq: ok = std::abs(lhs - c.rhs) <= t; break;
    }
    if (!ok) out.push_back(c.name);
  }
  return out;
}

MilpModel MilpModel::rounded() const {
  MilpModel m = *this;
  for (auto& v : m.variables) {
    v.lower = round9(v.lower);
    v.upper = round9(v.upper);
  }
  for (auto& c : m.constraints) {
    c.rhs = round9(c.rhs);
    for (auto& t : c.terms) t.second = round9(t.second);
  }
  for (auto& t : m.objective) t.second = round9(t.second);
  return m;
}

bool MilpModel::operator==(const MilpModel& other) const {
  return variables == other.variables && constraints == other.constraints && objective == other.objective;
}

BigMPolicy BigMPolicy::for_instance(const Instance& instance) {
  const Parameters& par = instance.params;
  double max_deadline = 0.0;
  for (const auto& t : instance.trucks) max_deadline = std::max(max_deadline, t.latest_arrival);
  const double max_t = instance.network.max_travel_time();
  BigMPolicy m;
  m.time = 2.0 * max_deadline + par.capacity / par.eta + max_t;
  m.soc = par.capacity + par.sigma * max_t;
  m.platoon = m.time;
  m.ratio = static_cast<double>(std::max<std::size_t>(1, instance.num_trucks()));
  return m;
}

// ---------------------------------------------------------------- build

MilpModel build(const Instance& instance) {
  const RoadNetwork& net = instance.network;
  const Parameters& par = instance.params;
  const std::size_t n = net.num_nodes();
  const std::size_t A = net.num_arcs();
  const std::size_t K = instance.num_trucks();
  const BigMPolicy M = BigMPolicy::for_instance(instance);
  const double Q = par.capacity;

  MilpModel m;
  using Grid = std::vector<std::vector<std::size_t>>;
  auto arc_block = [&](const char* sym, VarKind kind, double lo, double hi) {
    Grid g(A, std::vector<std::size_t>(K));
    for (ArcIndex a = 0; a < A; ++a) {
      for (TruckIndex k = 0; k < K; ++k) {
        g[a][k] = m.add_variable(join_name(sym, {net.arc(a).tail, net.arc(a).head, k}), kind, lo, hi);
      }
    }
    return g;
  };
  auto node_block = [&](const char* sym, double lo, double hi) {
    Grid g(n, std::vector<std::size_t>(K));
    for (NodeIndex i = 0; i < n; ++i) {
      for (TruckIndex k = 0; k < K; ++k) g[i][k] = m.add_variable(join_name(sym, {i, k}), VarKind::continuous, lo, hi);
    }
    return g;
  };
  // pair[a][k1][k2] for k1 != k2
  using PairGrid = std::vector<std::vector<std::vector<std::size_t>>>;
  auto pair_block = [&](const char* sym, VarKind kind) {
    PairGrid g(A, Grid(K, std::vector<std::size_t>(K, SIZE_MAX)));
    for (ArcIndex a = 0; a < A; ++a) {
      for (TruckIndex k1 = 0; k1 < K; ++k1) {
        for (TruckIndex k2 = 0; k2 < K; ++k2) {
          if (k1 == k2) continue;
          g[a][k1][k2] = m.add_variable(join_name(sym, {net.arc(a).tail, net.arc(a).head, k1, k2}), kind, 0.0, 1.0);
        }
      }
    }
    return g;
  };

  const Grid x = arc_block("x", VarKind::binary, 0.0, 1.0);
  const Grid y = node_block("y", 0.0, 1.0);
  const Grid l = arc_block("l", VarKind::binary, 0.0, 1.0);
  const PairGrid f = pair_block("f", VarKind::binary);
  const Grid v = node_block("v", 0.0, kInfinity);
  const Grid s = node_block("s", 0.0, kInfinity);
  const Grid w = node_block("w", 0.0, kInfinity);
  const Grid h = arc_block("h", par.binary_leading_ratio ? VarKind::binary : VarKind::continuous, 0.0, 1.0);
  const PairGrid hbar = pair_block("hbar", VarKind::continuous);
  const Grid e = arc_block("e", VarKind::binary, 0.0, 1.0);

  auto add = [&](std::string name, std::vector<std::pair<std::size_t, double>> terms, Sense sense, double rhs) {
    std::erase_if(terms, [](const auto& t) { return t.second == 0.0; });
    m.constraints.push_back(Constraint{std::move(name), std::move(terms), sense, rhs});
  };
  auto row = [](const char* eq, std::initializer_list<std::size_t> idx) { return join_name(eq, idx); };

  // Routing.
  for (TruckIndex k = 0; k < K; ++k) {
    const auto& t = instance.trucks[k];
    for (NodeIndex j = 0; j < n; ++j) {
      if (j == t.origin || j == t.destination) continue;
      std::vector<std::pair<std::size_t, double>> terms;
      for (ArcIndex a : net.in_arcs(j)) terms.emplace_back(x[a][k], 1.0);
      for (ArcIndex a : net.out_arcs(j)) terms.emplace_back(x[a][k], -1.0);
      add(row("c2", {j, k}), terms, Sense::eq, 0.0);
    }
  }
  for (TruckIndex k = 0; k < K; ++k) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (ArcIndex a : net.out_arcs(instance.trucks[k].origin)) terms.emplace_back(x[a][k], 1.0);
    add(row("c3", {k}), terms, Sense::eq, 1.0);
  }
  for (TruckIndex k = 0; k < K; ++k) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (ArcIndex a : net.in_arcs(instance.trucks[k].destination)) terms.emplace_back(x[a][k], 1.0);
    add(row("c4", {k}), terms, Sense::eq, 1.0);
  }

  // Energy.
  for (NodeIndex i = 0; i < n; ++i) {
    for (TruckIndex k = 0; k < K; ++k) add(row("c5", {i, k}), {{y[i][k], 1.0}}, Sense::ge, par.soc_lower);
  }
  for (NodeIndex i = 0; i < n; ++i) {
    for (TruckIndex k = 0; k < K; ++k) {
      add(row("c6", {i, k}), {{y[i][k], Q}, {v[i][k], par.eta}}, Sense::le, par.soc_upper * Q);
    }
  }
  for (TruckIndex k = 0; k < K; ++k) {
    add(row("c7", {k}), {{y[instance.trucks[k].origin][k], 1.0}}, Sense::eq, par.soc_upper);
  }
  for (TruckIndex k = 0; k < K; ++k) {
    const NodeIndex d = instance.trucks[k].destination;
    add(row("c8", {k}), {{y[d][k], Q}, {v[d][k], par.eta}}, Sense::eq, par.soc_upper * Q);
  }
  for (TruckIndex k = 0; k < K; ++k) {
    for (NodeIndex i = 0; i < n; ++i) {
      if (instance.can_charge(i) && i != instance.trucks[k].origin) continue;
      add(row("c9", {i, k}), {{v[i][k], 1.0}}, Sense::eq, 0.0);
    }
  }
  for (ArcIndex a = 0; a < A; ++a) {
    const Arc& arc = net.arc(a);
    const double full = par.sigma * arc.travel_time;
    for (TruckIndex k = 0; k < K; ++k) {
      add(row("c10", {arc.tail, arc.head, k}),
          {{y[arc.tail][k], Q}, {v[arc.tail][k], par.eta}, {h[a][k], -full * par.beta}, {x[a][k], -M.soc},
           {y[arc.head][k], -Q}},
          Sense::ge, full * (1.0 - par.beta) - M.soc);
    }
  }

  // Timing.
  for (ArcIndex a = 0; a < A; ++a) {
    const Arc& arc = net.arc(a);
    for (TruckIndex k = 0; k < K; ++k) {
      add(row("c11", {arc.tail, arc.head, k}),
          {{s[arc.tail][k], 1.0}, {w[arc.tail][k], 1.0}, {s[arc.head][k], -1.0}, {x[a][k], M.time}}, Sense::le,
          M.time - arc.travel_time);
    }
  }
  for (ArcIndex a = 0; a < A; ++a) {
    const Arc& arc = net.arc(a);
    for (TruckIndex k = 0; k < K; ++k) {
      add(row("c12", {arc.tail, arc.head, k}),
          {{s[arc.tail][k], 1.0}, {w[arc.tail][k], 1.0}, {s[arc.head][k], -1.0}, {x[a][k], -M.time}}, Sense::ge,
          -M.time - arc.travel_time);
    }
  }
  for (TruckIndex k = 0; k < K; ++k) {
    add(row("c13", {k}), {{s[instance.trucks[k].destination][k], 1.0}}, Sense::le,
        instance.trucks[k].latest_arrival);
  }
  for (NodeIndex i = 0; i < n; ++i) {
    for (TruckIndex k = 0; k < K; ++k) add(row("c14", {i, k}), {{w[i][k], 1.0}, {v[i][k], -1.0}}, Sense::ge, 0.0);
  }

  // Platooning.
  for (ArcIndex a = 0; a < A; ++a) {
    const Arc& arc = net.arc(a);
    for (TruckIndex k = 0; k < K; ++k) {
      std::vector<std::pair<std::size_t, double>> terms{{x[a][k], 1.0}, {l[a][k], -1.0}};
      for (TruckIndex k1 = 0; k1 < K; ++k1) {
        if (k1 != k) terms.emplace_back(f[a][k1][k], -1.0);
      }
      add(row("c15", {arc.tail, arc.head, k}), terms, Sense::eq, 0.0);
    }
  }
  for (ArcIndex a = 0; a < A; ++a) {
    const Arc& arc = net.arc(a);
    for (TruckIndex k = 0; k < K; ++k) {
      add(row("c16", {arc.tail, arc.head, k}), {{x[a][k], 1.0}, {h[a][k], -1.0}}, Sense::ge, 0.0);
    }
  }
  for (ArcIndex a = 0; a < A; ++a) {
    const Arc& arc = net.arc(a);
    for (TruckIndex k1 = 0; k1 < K; ++k1) {
      std::vector<std::pair<std::size_t, double>> terms;
      for (TruckIndex k2 = 0; k2 < K; ++k2) {
        if (k2 != k1) terms.emplace_back(f[a][k1][k2], 1.0);
      }
      terms.emplace_back(l[a][k1], -static_cast<double>(par.max_platoon_size - 1));
      add(row("c19", {arc.tail, arc.head, k1}), terms, Sense::le, 0.0);
    }
  }
  for (const bool upper : {false, true}) {
    for (ArcIndex a = 0; a < A; ++a) {
      const Arc& arc = net.arc(a);
      for (TruckIndex k1 = 0; k1 < K; ++k1) {
        for (TruckIndex k2 = 0; k2 < K; ++k2) {
          if (k1 == k2) continue;
          const NodeIndex i = arc.tail;
          std::vector<std::pair<std::size_t, double>> terms{
              {s[i][k1], 1.0}, {w[i][k1], 1.0}, {s[i][k2], -1.0}, {w[i][k2], -1.0}};
          if (upper) {
            terms.emplace_back(f[a][k1][k2], M.platoon);
            add(row("c21", {arc.tail, arc.head, k1, k2}), terms, Sense::le, M.platoon);
          } else {
            terms.emplace_back(f[a][k1][k2], -M.platoon);
            add(row("c20", {arc.tail, arc.head, k1, k2}), terms, Sense::ge, -M.platoon);
          }
        }
      }
    }
  }
  for (ArcIndex a = 0; a < A; ++a) {
    const Arc& arc = net.arc(a);
    for (TruckIndex k = 0; k < K; ++k) {
      add(row("c22", {arc.tail, arc.head, k}), {{e[a][k], 1.0}, {h[a][k], -1.0}}, Sense::ge, 0.0);
    }
  }

  // Linearised ratio balance of each designated leader.
  for (const bool upper : {false, true}) {
    for (ArcIndex a = 0; a < A; ++a) {
      const Arc& arc = net.arc(a);
      for (TruckIndex k1 = 0; k1 < K; ++k1) {
        std::vector<std::pair<std::size_t, double>> terms{{h[a][k1], 1.0}};
        for (TruckIndex k2 = 0; k2 < K; ++k2) {
          if (k2 != k1) terms.emplace_back(hbar[a][k1][k2], 1.0);
        }
        if (upper) {
          terms.emplace_back(l[a][k1], M.ratio);
          add(row("c34", {arc.tail, arc.head, k1}), terms, Sense::le, 1.0 + M.ratio);
        } else {
          terms.emplace_back(l[a][k1], -M.ratio);
          add(row("c33", {arc.tail, arc.head, k1}), terms, Sense::ge, 1.0 - M.ratio);
        }
      }
    }
  }
  for (int eq = 35; eq <= 37; ++eq) {
    for (ArcIndex a = 0; a < A; ++a) {
      const Arc& arc = net.arc(a);
      for (TruckIndex k1 = 0; k1 < K; ++k1) {
        for (TruckIndex k2 = 0; k2 < K; ++k2) {
          if (k1 == k2) continue;
          const std::string name = join_name(("c" + std::to_string(eq)).c_str(), {arc.tail, arc.head, k1, k2});
          const std::size_t hb = hbar[a][k1][k2];
          if (eq == 35) add(name, {{hb, 1.0}, {h[a][k2], -1.0}}, Sense::le, 0.0);
          if (eq == 36) add(name, {{hb, 1.0}, {f[a][k1][k2], -1.0}}, Sense::le, 0.0);
          if (eq == 37) add(name, {{hb, 1.0}, {h[a][k2], -1.0}, {f[a][k1][k2], -1.0}}, Sense::ge, -1.0);
        }
      }
    }
  }

  // Objective.
  std::vector<double> obj(m.variables.size(), 0.0);
  for (NodeIndex i = 0; i < n; ++i) {
    for (TruckIndex k = 0; k < K; ++k) {
      obj[v[i][k]] += par.eta * instance.price(i);
      if (i != instance.trucks[k].origin && i != instance.trucks[k].destination) obj[w[i][k]] += par.alpha3;
    }
  }
  for (ArcIndex a = 0; a < A; ++a) {
    const double t = net.arc(a).travel_time;
    for (TruckIndex k = 0; k < K; ++k) {
      obj[l[a][k]] += par.alpha1 * t - par.alpha4;
      obj[e[a][k]] += par.alpha4;
      for (TruckIndex k1 = 0; k1 < K; ++k1) {
        if (k1 != k) obj[f[a][k1][k]] += par.alpha2 * t;
      }
    }
  }
  for (std::size_t i = 0; i < obj.size(); ++i) {
    if (obj[i] != 0.0) m.objective.emplace_back(i, obj[i]);
  }
  return m;
}

// ---------------------------------------------------------------- LP text

namespace {

void write_terms(std::ostringstream& out, const MilpModel& m, const std::vector<std::pair<std::size_t, double>>& terms,
                 std::size_t line_start) {
  std::size_t col = static_cast<std::size_t>(out.tellp()) - line_start;
  bool first = true;
  for (const auto& [v, c] : terms) {
    std::string piece;
    if (first) {
      piece = (c < 0 ? "-" : "") + num(std::abs(c)) + " " + m.variables[v].name;
    } else {
      piece = std::string(c < 0 ? " - " : " + ") + num(std::abs(c)) + " " + m.variables[v].name;
    }
    if (col + piece.size() > 200) {
      out << "\n   ";
      line_start = static_cast<std::size_t>(out.tellp()) - 3;
      col = 3;
      if (!first && piece.front() == ' ') piece.erase(0, 1);
    }
    out << piece;
    col += piece.size();
    first = false;
  }
}

const char* sense_text(Sense s) {
  switch (s) {
    case Sense::le: return "<=";
    case Sense::ge: return ">=";
    case Sense::eq: return "=";
  }
  return "=";
}

}  // namespace

std::string to_lp_string(const MilpModel& m) {
  std::ostringstream out;
  out << "\\ truck platooning with en-route charging\n";
  out << "Minimize\n";
  std::size_t start = static_cast<std::size_t>(out.tellp());
  out << " obj: ";
  write_terms(out, m, m.objective, start);
  out << "\nSubject To\n";
  for (const Constraint& c : m.constraints) {
    start = static_cast<std::size_t>(out.tellp());
    out << ' ' << c.name << ": ";
    if (c.terms.empty()) out << "0 " << m.variables.front().name;
    write_terms(out, m, c.terms, start);
    out << ' ' << sense_text(c.sense) << ' ' << num(c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const Variable& v : m.variables) {
    if (std::isinf(v.upper)) {
      if (std::isinf(v.lower)) {
        out << ' ' << v.name << " free\n";
      } else {
        out << ' ' << v.name << " >= " << num(v.lower) << '\n';
      }
    } else {
      out << ' ' << (std::isinf(v.lower) ? "-inf" : num(v.lower)) << " <= " << v.name << " <= " << num(v.upper)
          << '\n';
    }
  }
  bool any_binary = false;
  for (const Variable& v : m.variables) {
    if (v.kind != VarKind::binary) continue;
    if (!any_binary) out << "Binaries\n";
    any_binary = true;
    out << ' ' << v.name << '\n';
  }
  out << "End\n";
  return out.str();
}

void export_lp(const MilpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(ErrorCode::io, "cannot write " + path.string());
  out << to_lp_string(model);
  if (!out) throw InputError(ErrorCode::io, "failed writing " + path.string());
}

namespace {

enum class Section { none, objective, constraints, bounds, binaries, end };

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<Section> section_keyword(const std::string& line) {
  std::string t = lower(line);
  t.erase(0, t.find_first_not_of(" \t\r"));
  t.erase(t.find_last_not_of(" \t\r") + 1);
  if (t == "minimize" || t == "minimise" || t == "minimum" || t == "min") return Section::objective;
  if (t == "subject to" || t == "such that" || t == "st" || t == "s.t.") return Section::constraints;
  if (t == "bounds" || t == "bound") return Section::bounds;
  if (t == "binaries" || t == "binary" || t == "bin") return Section::binaries;
  if (t == "end") return Section::end;
  if (t == "maximize" || t == "maximise" || t == "max" || t == "generals" || t == "general" || t == "semi-continuous")
    throw InputError(ErrorCode::schema, "unsupported LP section: " + t);
  return std::nullopt;
}

struct Token {
  enum Kind { number, name, label, op } kind;
  std::string text;
  double value = 0.0;
};

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' || c == ']' || c == '#' ||
         c == '$' || c == '%' || c == '&' || c == '{' || c == '}' || c == '~' || c == '\'' || c == '!' ||
         c == '"' || c == '?' || c == '@' || c == '^' || c == ',' || c == ';' || c == '(' || c == ')' || c == '/';
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      if (i + 1 < text.size() && text[i + 1] == '=') {
        op += '=';
        ++i;
      } else if (c == '=' && i + 1 < text.size() && (text[i + 1] == '<' || text[i + 1] == '>')) {
        op = std::string(1, text[i + 1]) + "=";
        ++i;
      }
      if (op == "<") op = "<=";
      if (op == ">") op = ">=";
      out.push_back({Token::op, op});
      ++i;
    } else if (c == '+' || c == '-') {
      out.push_back({Token::op, std::string(1, c)});
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(text.c_str() + i, &end);
      const std::size_t len = static_cast<std::size_t>(end - (text.c_str() + i));
      if (len == 0) throw InputError(ErrorCode::schema, "bad number in LP text");
      out.push_back({Token::number, text.substr(i, len), v});
      i += len;
    } else if (name_char(c)) {
      std::size_t j = i;
      while (j < text.size() && name_char(text[j])) ++j;
      std::string word = text.substr(i, j - i);
      std::size_t k = j;
      while (k < text.size() && (text[k] == ' ' || text[k] == '\t')) ++k;
      if (k < text.size() && text[k] == ':') {
        out.push_back({Token::label, word});
        j = k + 1;
      } else {
        const std::string lw = lower(word);
        if (lw == "inf" || lw == "infinity") {
          out.push_back({Token::number, word, kInfinity});
        } else {
          out.push_back({Token::name, word});
        }
      }
      i = j;
    } else {
      throw InputError(ErrorCode::schema, std::string("unexpected character in LP text: ") + c);
    }
  }
  return out;
}

struct NamedTerms {
  std::vector<std::pair<std::string, double>> terms;
};

// Parses "[+|-] [coef] name" repeated until a sense operator or the end.
std::size_t parse_terms(const std::vector<Token>& tk, std::size_t i, NamedTerms& out) {
  while (i < tk.size()) {
    if (tk[i].kind == Token::op && (tk[i].text == "<=" || tk[i].text == ">=" || tk[i].text == "=")) break;
    if (tk[i].kind == Token::label) break;
    double sign = 1.0;
    while (i < tk.size() && tk[i].kind == Token::op && (tk[i].text == "+" || tk[i].text == "-")) {
      if (tk[i].text == "-") sign = -sign;
      ++i;
    }
    double coef = 1.0;
    if (i < tk.size() && tk[i].kind == Token::number) {
      coef = tk[i].value;
      ++i;
    }
    if (i >= tk.size() || tk[i].kind != Token::name) throw InputError(ErrorCode::schema, "expected variable name");
    out.terms.emplace_back(tk[i].text, sign * coef);
    ++i;
  }
  return i;
}

double parse_signed_number(const std::vector<Token>& tk, std::size_t& i) {
  double sign = 1.0;
  while (i < tk.size() && tk[i].kind == Token::op && (tk[i].text == "+" || tk[i].text == "-")) {
    if (tk[i].text == "-") sign = -sign;
    ++i;
  }
  if (i >= tk.size() || tk[i].kind != Token::number) throw InputError(ErrorCode::schema, "expected number");
  return sign * tk[i++].value;
}

}  // namespace

MilpModel parse_lp(const std::string& text) {
  std::string sections[5];
  Section current = Section::none;
  bool ended = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto bs = line.find('\\');
    if (bs != std::string::npos) line.erase(bs);
    if (auto kw = section_keyword(line)) {
      current = *kw;
      if (current == Section::end) ended = true;
      continue;
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (current == Section::none || current == Section::end) {
      throw InputError(ErrorCode::schema, "LP text outside a section: " + line);
    }
    auto& buf = sections[static_cast<int>(current)];
    if (current == Section::bounds || current == Section::binaries) {
      buf += line + "\n";
    } else {
      buf += line + " ";
    }
  }
  if (!ended) throw InputError(ErrorCode::schema, "LP text has no End");

  struct PendingRow {
    std::string name;
    NamedTerms terms;
    Sense sense;
    double rhs;
  };

  // Objective.
  NamedTerms objective;
  {
    auto tk = tokenize(sections[static_cast<int>(Section::objective)]);
    std::size_t i = 0;
    if (i < tk.size() && tk[i].kind == Token::label) ++i;
    i = parse_terms(tk, i, objective);
    if (i != tk.size()) throw InputError(ErrorCode::schema, "trailing tokens in objective");
  }

  std::vector<PendingRow> rows;
  {
    auto tk = tokenize(sections[static_cast<int>(Section::constraints)]);
    std::size_t i = 0;
    while (i < tk.size()) {
      PendingRow r;
      if (tk[i].kind == Token::label) {
        r.name = tk[i].text;
        ++i;
      } else {
        r.name = "R" + std::to_string(rows.size() + 1);
      }
      i = parse_terms(tk, i, r.terms);
      if (i >= tk.size() || tk[i].kind != Token::op) throw InputError(ErrorCode::schema, "row without sense: " + r.name);
      r.sense = tk[i].text == "<=" ? Sense::le : tk[i].text == ">=" ? Sense::ge : Sense::eq;
      ++i;
      r.rhs = parse_signed_number(tk, i);
      rows.push_back(std::move(r));
    }
  }

  MilpModel m;
  std::map<std::string, std::pair<double, double>> bounds;
  auto ensure = [&](const std::string& name) {
    if (auto idx = m.find(name)) return *idx;
    return m.add_variable(name, VarKind::continuous, 0.0, kInfinity);
  };

  {
    std::istringstream bin(sections[static_cast<int>(Section::bounds)]);
    while (std::getline(bin, line)) {
      auto tk = tokenize(line);
      if (tk.empty()) continue;
      std::size_t i = 0;
      double lo = 0.0, hi = kInfinity;
      std::string name;
      if (tk[0].kind == Token::name) {
        name = tk[0].text;
        i = 1;
        if (i < tk.size() && tk[i].kind == Token::name && lower(tk[i].text) == "free") {
          lo = -kInfinity;
          ++i;
        } else {
          if (i >= tk.size() || tk[i].kind != Token::op) throw InputError(ErrorCode::schema, "bad bound: " + line);
          const std::string op = tk[i++].text;
          const double val = parse_signed_number(tk, i);
          if (op == ">=") lo = val;
          else if (op == "<=") hi = val;
          else lo = hi = val;
        }
      } else {
        lo = parse_signed_number(tk, i);
        if (i >= tk.size() || tk[i].text != "<=") throw InputError(ErrorCode::schema, "bad bound: " + line);
        ++i;
        if (i >= tk.size() || tk[i].kind != Token::name) throw InputError(ErrorCode::schema, "bad bound: " + line);
        name = tk[i++].text;
        if (i < tk.size()) {
          if (tk[i].text != "<=") throw InputError(ErrorCode::schema, "bad bound: " + line);
          ++i;
          hi = parse_signed_number(tk, i);
        }
      }
      if (i != tk.size()) throw InputError(ErrorCode::schema, "trailing tokens in bound: " + line);
      const std::size_t idx = ensure(name);
      m.variables[idx].lower = lo;
      m.variables[idx].upper = hi;
      bounds[name] = {lo, hi};
    }
  }

  auto resolve = [&](const NamedTerms& t) {
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& [name, c] : t.terms) out.emplace_back(ensure(name), c);
    return out;
  };
  m.objective = resolve(objective);
  std::sort(m.objective.begin(), m.objective.end());
  for (auto& r : rows) m.constraints.push_back(Constraint{r.name, resolve(r.terms), r.sense, r.rhs});

  {
    auto tk = tokenize(sections[static_cast<int>(Section::binaries)]);
    for (const Token& t : tk) {
      if (t.kind != Token::name) throw InputError(ErrorCode::schema, "bad Binaries entry: " + t.text);
      const std::size_t idx = ensure(t.text);
      Variable& v = m.variables[idx];
      v.kind = VarKind::binary;
      if (!bounds.count(t.text)) {
        v.lower = 0.0;
        v.upper = 1.0;
      }
    }
  }
  return m;
}

MilpModel load_lp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(ErrorCode::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_lp(ss.str());
}

// ---------------------------------------------------------------- plan mapping

namespace {

constexpr double kLeads = 1e-9;
constexpr std::size_t kMaxBruteForceNodes = 16;

TruckIndex designated_leader(const std::vector<Member>& members,
                             const std::unordered_map<TruckIndex, const Itinerary*>& by_truck) {
  TruckIndex best = members.front().truck;
  double best_h = -1.0;
  for (const Member& mb : members) {
    const double h = by_truck.at(mb.truck)->ratio[mb.pos];
    if (h > best_h + 1e-12 || (std::abs(h - best_h) <= 1e-12 && mb.truck < best)) {
      best = mb.truck;
      best_h = h;
    }
  }
  return best;
}

}  // namespace

std::vector<double> plan_to_assignment(const Instance& instance, const MilpModel& model, const Plan& plan) {
  std::vector<Violation> structural;
  Solution sol = to_solution(instance, plan, &structural);
  if (!structural.empty()) throw ScheduleError("plan is malformed: " + structural.front().kind);
  const ItineraryRefs refs = sol.refs();
  const Assessment as = assess(instance, refs, true);
  if (!as.schedule) throw ScheduleError("plan has no schedule");
  if (!as.feasible()) throw ScheduleError("plan is infeasible: " + as.violations.front().kind);

  const Parameters& par = instance.params;
  std::vector<double> x(model.variables.size(), 0.0);
  auto set = [&](const std::string& name, double value) { x[model.at(name)] = value; };
  for (NodeIndex i = 0; i < instance.network.num_nodes(); ++i) {
    for (TruckIndex k = 0; k < instance.num_trucks(); ++k) set(join_name("y", {i, k}), par.soc_upper);
  }

  const GroupMap groups = build_groups(refs);
  std::unordered_map<TruckIndex, const Itinerary*> by_truck;
  for (const auto& [k, it] : refs) by_truck[k] = it;

  for (const auto& [k, it] : refs) {
    for (std::size_t p = 0; p < it->num_arcs(); ++p) {
      const NodeIndex i = it->nodes[p], j = it->nodes[p + 1];
      const auto& members = groups.at(GroupKey{i, j, it->platoon[p]});
      set(join_name("x", {i, j, k}), 1.0);
      if (members.size() == 1) {
        set(join_name("l", {i, j, k}), 1.0);
        set(join_name("h", {i, j, k}), 1.0);
        set(join_name("e", {i, j, k}), 1.0);
        continue;
      }
      const double h = it->ratio[p];
      set(join_name("h", {i, j, k}), h);
      set(join_name("e", {i, j, k}), h > kLeads ? 1.0 : 0.0);
      const TruckIndex leader = designated_leader(members, by_truck);
      if (leader == k) {
        set(join_name("l", {i, j, k}), 1.0);
      } else {
        set(join_name("f", {i, j, leader, k}), 1.0);
        set(join_name("hbar", {i, j, leader, k}), h);
      }
    }
  }

  for (const TruckSchedule& ts : as.schedule->trucks) {
    const TruckIndex k = ts.truck;
    for (const Stop& st : ts.stops) {
      set(join_name("y", {st.node, k}), st.soc_on_arrival);
      set(join_name("s", {st.node, k}), st.arrival);
      set(join_name("w", {st.node, k}), st.dwell);
      set(join_name("v", {st.node, k}), st.charge / par.eta);
    }
  }
  return x;
}

// ---------------------------------------------------------------- brute force

namespace {

struct RouteOption {
  std::vector<NodeIndex> nodes;
  std::vector<ArcIndex> arcs;
};

std::vector<RouteOption> simple_routes(const RoadNetwork& net, NodeIndex origin, NodeIndex destination,
                                       double max_hours) {
  std::vector<RouteOption> out;
  RouteOption cur;
  cur.nodes.push_back(origin);
  std::vector<char> on(net.num_nodes(), 0);
  on[origin] = 1;
  std::function<void(NodeIndex, double)> dfs = [&](NodeIndex u, double hours) {
    if (u == destination) {
      out.push_back(cur);
      return;
    }
    for (ArcIndex a : net.out_arcs(u)) {
      const Arc& arc = net.arc(a);
      if (on[arc.head] || hours + arc.travel_time > max_hours + 1e-9) continue;
      on[arc.head] = 1;
      cur.nodes.push_back(arc.head);
      cur.arcs.push_back(a);
      dfs(arc.head, hours + arc.travel_time);
      cur.arcs.pop_back();
      cur.nodes.pop_back();
      on[arc.head] = 0;
    }
  };
  dfs(origin, 0.0);
  return out;
}

struct ChargeOption {
  std::vector<double> charge;  // per arc, taken at its head
  double cost = 0.0;           // charging plus the minimum dwell it forces en route
};

std::vector<ChargeOption> charge_options(const Instance& instance, const std::vector<NodeIndex>& nodes,
                                         const std::vector<double>& cons, double step) {
  const Parameters& par = instance.params;
  const std::size_t m = cons.size();
  std::vector<ChargeOption> out;
  ChargeOption cur;
  cur.charge.assign(m, 0.0);
  std::function<void(std::size_t, double, double)> dfs = [&](std::size_t p, double energy, double cost) {
    energy -= cons[p];
    if (energy < par.floor_energy() - 1e-9) return;
    const NodeIndex j = nodes[p + 1];
    if (p + 1 == m) {
      const double fill = std::max(0.0, par.full_energy() - energy);
      cur.charge[p] = fill;
      out.push_back(ChargeOption{cur.charge, cost + instance.price(j) * fill});
      cur.charge[p] = 0.0;
      return;
    }
    if (!instance.can_charge(j)) {
      dfs(p + 1, energy, cost);
      return;
    }
    const double unit = instance.price(j) + par.alpha3 / par.eta;
    for (int q = 0;; ++q) {
      const double amount = q * step;
      if (energy + amount > par.full_energy() + 1e-9) break;
      cur.charge[p] = amount;
      dfs(p + 1, energy + amount, cost + unit * amount);
    }
    cur.charge[p] = 0.0;
  };
  if (m > 0) dfs(0, par.full_energy(), 0.0);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.cost < b.cost; });
  return out;
}

// Set partitions of `items` into blocks of at most `cap`.
void partitions(const std::vector<TruckIndex>& items, std::size_t cap, std::vector<std::vector<std::vector<TruckIndex>>>& out) {
  std::vector<std::vector<TruckIndex>> blocks;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == items.size()) {
      out.push_back(blocks);
      return;
    }
    for (auto& b : blocks) {
      if (b.size() >= cap) continue;
      b.push_back(items[i]);
      rec(i + 1);
      b.pop_back();
    }
    blocks.push_back({items[i]});
    rec(i + 1);
    blocks.pop_back();
  };
  rec(0);
}

// Ratio vectors on the grid that sum to one.
void ratio_grid(std::size_t members, int steps, bool binary, std::vector<std::vector<double>>& out) {
  std::vector<int> units(members, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == members) {
      units[i] = left;
      std::vector<double> h(members);
      for (std::size_t j = 0; j < members; ++j) h[j] = static_cast<double>(units[j]) / steps;
      out.push_back(std::move(h));
      return;
    }
    for (int u = 0; u <= left; ++u) {
      if (binary && u != 0 && u != steps) continue;
      units[i] = u;
      rec(i + 1, left - u);
    }
  };
  rec(0, steps);
}

}  // namespace

std::optional<BruteForceResult> brute_force_exact(const Instance& instance, const BruteForceGrid& grid) {
  const std::size_t K = instance.num_trucks();
  const RoadNetwork& net = instance.network;
  const Parameters& par = instance.params;
  if (K > 3 || net.num_nodes() > kMaxBruteForceNodes) {
    throw InputError(ErrorCode::too_large, "exhaustive search is limited to 3 trucks and 16 nodes");
  }
  if (!(grid.h_step > 0.0 && grid.h_step <= 1.0) || !(grid.charge_step > 0.0 && grid.charge_step <= 1.0)) {
    throw InputError(ErrorCode::invalid_parameter, "grid steps must lie in (0, 1]");
  }
  const int steps = std::max(1, static_cast<int>(std::lround(1.0 / grid.h_step)));
  const double charge_step = grid.charge_step * par.capacity;

  std::vector<std::vector<RouteOption>> routes(K);
  for (TruckIndex k = 0; k < K; ++k) {
    const auto& t = instance.trucks[k];
    routes[k] = simple_routes(net, t.origin, t.destination, t.latest_arrival);
    if (routes[k].empty()) return std::nullopt;
  }

  std::map<std::pair<TruckIndex, std::vector<double>>, std::vector<ChargeOption>> cache;
  auto options_for = [&](TruckIndex k, std::size_t r, const std::vector<double>& cons) -> const std::vector<ChargeOption>& {
    std::vector<double> key = cons;
    key.push_back(static_cast<double>(r));
    auto it = cache.find({k, key});
    if (it != cache.end()) return it->second;
    return cache.emplace(std::make_pair(k, key), charge_options(instance, routes[k][r].nodes, cons, charge_step))
        .first->second;
  };

  std::optional<BruteForceResult> best;
  double best_cost = kInfinity;
  std::size_t evaluated = 0;

  std::vector<std::size_t> pick(K, 0);
  // Per truck and arc position: platoon id and ratio.
  std::vector<std::vector<PlatoonId>> pid(K);
  std::vector<std::vector<double>> ratio(K);
  std::vector<std::vector<std::size_t>> gsize(K);
  std::vector<std::vector<char>> leads(K);  // designated leader of its group

  auto evaluate_config = [&]() {
    std::vector<std::vector<double>> cons(K);
    std::vector<double> labor(K, 0.0);
    double restructuring = 0.0;
    std::map<std::pair<ArcIndex, PlatoonId>, std::size_t> leading_members;
    for (TruckIndex k = 0; k < K; ++k) {
      const auto& r = routes[k][pick[k]];
      cons[k].resize(r.arcs.size());
      for (std::size_t p = 0; p < r.arcs.size(); ++p) {
        const double t = net.arc(r.arcs[p]).travel_time;
        cons[k][p] = arc_consumption(par, t, ratio[k][p], gsize[k][p]);
        labor[k] += (leads[k][p] ? par.alpha1 : par.alpha2) * t;
        if (gsize[k][p] >= 2 && ratio[k][p] > kLeads) ++leading_members[{r.arcs[p], pid[k][p]}];
      }
    }
    for (const auto& [key, count] : leading_members) restructuring += par.alpha4 * static_cast<double>(count - 1);

    std::vector<const std::vector<ChargeOption>*> opts(K);
    double lb = restructuring;
    for (TruckIndex k = 0; k < K; ++k) {
      opts[k] = &options_for(k, pick[k], cons[k]);
      if (opts[k]->empty()) return;
      lb += labor[k] + opts[k]->front().cost;
    }
    if (lb >= best_cost - 1e-9) return;

    std::vector<double> rest_min(K + 1, 0.0);
    for (std::size_t k = K; k-- > 0;) rest_min[k] = rest_min[k + 1] + labor[k] + opts[k]->front().cost;

    std::vector<std::size_t> choice(K, 0);
    std::function<void(TruckIndex, double)> rec = [&](TruckIndex k, double partial) {
      if (k == K) {
        Solution sol(K);
        for (TruckIndex t = 0; t < K; ++t) {
          Itinerary it;
          it.nodes = routes[t][pick[t]].nodes;
          it.platoon = pid[t];
          it.ratio = ratio[t];
          it.charge = (*opts[t])[choice[t]].charge;
          sol.at(t) = std::move(it);
        }
        ++evaluated;
        const Assessment as = assess(instance, sol.refs());
        if (as.feasible() && as.cost.total < best_cost - 1e-9) {
          best_cost = as.cost.total;
          best = BruteForceResult{to_plan(sol), as.cost, 0};
        }
        return;
      }
      for (std::size_t c = 0; c < opts[k]->size(); ++c) {
        const double here = labor[k] + (*opts[k])[c].cost;
        if (partial + here + rest_min[k + 1] >= best_cost - 1e-9) break;
        choice[k] = c;
        rec(k + 1, partial + here);
      }
    };
    rec(0, restructuring);
  };

  std::function<void(TruckIndex)> choose_route = [&](TruckIndex k) {
    if (k < K) {
      for (std::size_t r = 0; r < routes[k].size(); ++r) {
        pick[k] = r;
        choose_route(k + 1);
      }
      return;
    }
    // Shared arcs and their users.
    std::map<ArcIndex, std::vector<std::pair<TruckIndex, std::size_t>>> users;
    for (TruckIndex t = 0; t < K; ++t) {
      const auto& r = routes[t][pick[t]];
      pid[t].assign(r.arcs.size(), static_cast<PlatoonId>(t));
      ratio[t].assign(r.arcs.size(), 1.0);
      gsize[t].assign(r.arcs.size(), 1);
      leads[t].assign(r.arcs.size(), 1);
      for (std::size_t p = 0; p < r.arcs.size(); ++p) users[r.arcs[p]].emplace_back(t, p);
    }
    std::vector<std::vector<std::pair<TruckIndex, std::size_t>>> shared;
    for (auto& [a, u] : users) {
      if (u.size() >= 2) shared.push_back(u);
    }
    const std::size_t cap = static_cast<std::size_t>(std::max(1, par.max_platoon_size));

    std::function<void(std::size_t)> per_arc = [&](std::size_t si) {
      if (si == shared.size()) {
        evaluate_config();
        return;
      }
      const auto& u = shared[si];
      std::vector<TruckIndex> items;
      std::map<TruckIndex, std::size_t> pos;
      for (const auto& [t, p] : u) {
        items.push_back(t);
        pos[t] = p;
      }
      std::vector<std::vector<std::vector<TruckIndex>>> parts;
      partitions(items, cap, parts);
      for (const auto& blocks : parts) {
        // Ratio choices for every multi-member block.
        std::vector<std::vector<std::vector<double>>> choices;
        for (const auto& b : blocks) {
          std::vector<std::vector<double>> g;
          if (b.size() >= 2) ratio_grid(b.size(), steps, par.binary_leading_ratio, g);
          else g.push_back({1.0});
          choices.push_back(std::move(g));
        }
        std::function<void(std::size_t)> per_block = [&](std::size_t bi) {
          if (bi == blocks.size()) {
            per_arc(si + 1);
            return;
          }
          const auto& b = blocks[bi];
          const PlatoonId id = static_cast<PlatoonId>(*std::min_element(b.begin(), b.end()));
          for (const auto& hv : choices[bi]) {
            TruckIndex leader = b.front();
            double lh = -1.0;
            for (std::size_t j = 0; j < b.size(); ++j) {
              if (hv[j] > lh + 1e-12 || (std::abs(hv[j] - lh) <= 1e-12 && b[j] < leader)) {
                leader = b[j];
                lh = hv[j];
              }
            }
            for (std::size_t j = 0; j < b.size(); ++j) {
              const TruckIndex t = b[j];
              const std::size_t p = pos[t];
              pid[t][p] = b.size() >= 2 ? id : static_cast<PlatoonId>(t);
              ratio[t][p] = hv[j];
              gsize[t][p] = b.size();
              leads[t][p] = t == leader ? 1 : 0;
            }
            per_block(bi + 1);
          }
        };
        per_block(0);
      }
    };
    per_arc(0);
  };
  choose_route(0);

  if (best) best->evaluated = evaluated;
  return best;
}

}  // namespace platoon
