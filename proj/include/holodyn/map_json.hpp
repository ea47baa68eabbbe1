#pragma once

#include "holodyn/polymap.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace holodyn {

using json = nlohmann::json;

namespace detail {

inline cplx read_coef(const json& t) {
  return {t.value("re", 0.0), t.value("im", 0.0)};
}

inline std::shared_ptr<const EntireNode> read_entire(const json& j) {
  auto node = std::make_shared<EntireNode>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "exp") {
    node->kind = EntireNode::Kind::exp;
  } else if (kind == "sin") {
    node->kind = EntireNode::Kind::sin;
  } else if (kind == "poly") {
    node->kind = EntireNode::Kind::poly;
    std::map<int, int> seen;
    for (const auto& t : j.at("terms")) {
      auto e = t.at("exps").get<std::vector<int>>();
      if (e.size() != 1 || e[0] < 0) throw Error("entire poly terms need one non-negative exponent");
      if (seen[e[0]]++) throw Error("duplicate exponent vector in a component");
      node->poly.emplace_back(e[0], read_coef(t));
    }
  } else {
    throw Error("unknown entire node kind: " + kind);
  }
  if (j.contains("inner") && !j.at("inner").is_null()) node->inner = read_entire(j.at("inner"));
  return node;
}

inline json write_entire(const EntireNode& node) {
  json j;
  switch (node.kind) {
    case EntireNode::Kind::exp: j["kind"] = "exp"; break;
    case EntireNode::Kind::sin: j["kind"] = "sin"; break;
    case EntireNode::Kind::poly: {
      j["kind"] = "poly";
      j["terms"] = json::array();
      for (const auto& [k, c] : node.poly) j["terms"].push_back({{"exps", {k}}, {"re", c.real()}, {"im", c.imag()}});
      break;
    }
  }
  if (node.inner) j["inner"] = write_entire(*node.inner);
  return j;
}

}  // namespace detail

inline PolyMap map_from_json(const json& j) {
  try {
    const int n = j.at("n").get<int>();
    if (j.contains("entire")) {
      if (n != 1) throw Error("entire maps are one-dimensional");
      if (!j.contains("escape_radius")) throw Error("entire maps need an escape_radius");
      return PolyMap::entire(detail::read_entire(j.at("entire")), j.at("escape_radius").get<double>());
    }
    const auto& cs = j.at("components");
    if (!cs.is_array() || static_cast<int>(cs.size()) != n) throw Error("components must list n term arrays");
    std::vector<std::vector<Term>> comps(n);
    for (int i = 0; i < n; ++i) {
      for (const auto& t : cs[i]) {
        auto e = t.at("exps").get<std::vector<int>>();
        if (static_cast<int>(e.size()) != n) throw Error("exponent vector length must equal n");
        Term term;
        for (int k = 0; k < n; ++k) term.exps[k] = e[k];
        term.coef = detail::read_coef(t);
        comps[i].push_back(term);
      }
    }
    PolyMap f(n, std::move(comps));
    if (f.is_constant()) throw Error("map must be non-constant");
    return f;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed map: ") + e.what());
  }
}

inline json map_to_json(const PolyMap& f) {
  json j;
  j["n"] = f.dim();
  if (f.is_entire()) {
    j["entire"] = detail::write_entire(*f.entire_root());
    j["escape_radius"] = f.user_escape_radius();
    return j;
  }
  j["components"] = json::array();
  for (const auto& c : f.components()) {
    json arr = json::array();
    for (const auto& t : c) {
      std::vector<int> e(t.exps.begin(), t.exps.begin() + f.dim());
      arr.push_back({{"exps", e}, {"re", t.coef.real()}, {"im", t.coef.imag()}});
    }
    j["components"].push_back(arr);
  }
  return j;
}

inline PolyMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open map file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("malformed map file " + path + ": " + e.what());
  }
  return map_from_json(j);
}

// Shorthand used by tests and samples: n = 1 polynomial from (power, coef) pairs.
inline PolyMap poly1(std::initializer_list<std::pair<int, cplx>> terms) {
  std::vector<Term> c;
  for (auto [k, a] : terms) {
    Term t;
    t.exps[0] = k;
    t.coef = a;
    c.push_back(t);
  }
  return PolyMap(1, {c});
}

}  // namespace holodyn
