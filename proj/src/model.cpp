#include "spinlab/model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "spinlab/errors.hpp"

namespace spinlab {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::ZeroPartition: return "ZeroPartition";
    case ErrorKind::DegenerateRow: return "DegenerateRow";
    case ErrorKind::NotDivisible: return "NotDivisible";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::HardConstraintInfeasible: return "HardConstraintInfeasible";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::RegimeInapplicable: return "RegimeInapplicable";
    case ErrorKind::OutOfImage: return "OutOfImage";
    case ErrorKind::OutsideUniqueness: return "OutsideUniqueness";
    case ErrorKind::InvalidThreshold: return "InvalidThreshold";
  }
  return "Unknown";
}

Graph::Graph(int n_) : n(n_), adj(n_), order(n_) {
  if (n_ < 0) throw Error(ErrorKind::InvalidParams, "negative vertex count");
  std::iota(order.begin(), order.end(), 0);
}

void Graph::add_edge(int u, int v) {
  if (u < 0 || v < 0 || u >= n || v >= n)
    throw Error(ErrorKind::MalformedInput,
                "edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
  if (u == v) throw Error(ErrorKind::MalformedInput, "self-loop at " + std::to_string(u));
  if (has_edge(u, v))
    throw Error(ErrorKind::MalformedInput,
                "duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
  adj[u].insert(std::lower_bound(adj[u].begin(), adj[u].end(), v), v);
  adj[v].insert(std::lower_bound(adj[v].begin(), adj[v].end(), u), u);
}

bool Graph::has_edge(int u, int v) const {
  return std::binary_search(adj[u].begin(), adj[u].end(), v);
}

int Graph::max_degree() const {
  int d = 0;
  for (const auto& a : adj) d = std::max(d, static_cast<int>(a.size()));
  return d;
}

std::size_t Graph::edge_count() const {
  std::size_t s = 0;
  for (const auto& a : adj) s += a.size();
  return s / 2;
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < n; ++u)
    for (int v : adj[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

SpinParams SpinParams::uniform(int n, const Rat& beta, const Rat& gamma, const Rat& lambda) {
  SpinParams p;
  p.beta = beta;
  p.gamma = gamma;
  p.lambda.assign(n, lambda);
  return p;
}

void SpinParams::validate(int n) const {
  if (beta < 0) throw Error(ErrorKind::InvalidParams, "beta must be >= 0");
  if (gamma <= 0) throw Error(ErrorKind::InvalidParams, "gamma must be > 0");
  if (static_cast<int>(lambda.size()) != n)
    throw Error(ErrorKind::InvalidParams, "expected " + std::to_string(n) + " fields, got " +
                                              std::to_string(lambda.size()));
  for (const auto& l : lambda)
    if (l <= 0) throw Error(ErrorKind::InvalidParams, "fields must be > 0");
}

bool SpinParams::uniform_field() const {
  return std::all_of(lambda.begin(), lambda.end(), [&](const Rat& l) { return l == lambda[0]; });
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::AntiferroHard: return "antiferro-hard";
    case Regime::AntiferroSoft: return "antiferro-soft";
    case Regime::Ferro: return "ferro";
    case Regime::Product: return "product";
  }
  return "?";
}

Regime classify(const SpinParams& p) {
  if (p.beta == 0) return Regime::AntiferroHard;
  Rat bg = p.beta * p.gamma;
  if (bg == 1) return Regime::Product;
  return bg < 1 ? Regime::AntiferroSoft : Regime::Ferro;
}

std::vector<int> free_vertices(const Graph& g, const Boundary& bc) {
  std::vector<int> out;
  for (int v = 0; v < g.n; ++v)
    if (!bc.count(v)) out.push_back(v);
  return out;
}

void validate_boundary(const Graph& g, const Boundary& bc) {
  for (auto [v, s] : bc) {
    if (v < 0 || v >= g.n)
      throw Error(ErrorKind::InvalidParams, "pinned vertex " + std::to_string(v) + " out of range");
    if (s != 0 && s != 1)
      throw Error(ErrorKind::InvalidParams, "pinned spin must be 0 or 1");
  }
}

Rat config_weight(const Graph& g, const SpinParams& p, const Boundary& bc,
                  const Configuration& sigma) {
  auto fv = free_vertices(g, bc);
  if (sigma.size() != fv.size())
    throw Error(ErrorKind::InvalidParams, "configuration length does not match free vertex count");
  std::vector<int> spin(g.n, 0);
  std::vector<bool> is_free(g.n, false);
  for (auto [v, s] : bc) spin[v] = s;
  Rat w = 1;
  for (std::size_t i = 0; i < fv.size(); ++i) {
    spin[fv[i]] = sigma[i];
    is_free[fv[i]] = true;
    if (sigma[i]) w *= p.lambda[fv[i]];
  }
  unsigned m0 = 0, m1 = 0;
  for (auto [u, v] : g.edges()) {
    if (!is_free[u] && !is_free[v]) continue;
    if (spin[u] == spin[v]) (spin[u] ? m1 : m0)++;
  }
  return w * rat_pow(p.beta, m1) * rat_pow(p.gamma, m0);
}

DegreeProfile degree_profile(const Graph& g) {
  DegreeProfile d;
  d.degree.resize(g.n);
  for (int v = 0; v < g.n; ++v) d.degree[v] = g.degree(v);
  d.max_degree = g.max_degree();
  return d;
}

std::vector<int> components(const Graph& g, const std::vector<bool>& keep) {
  std::vector<int> comp(g.n, -1);
  auto kept = [&](int v) { return keep.empty() || keep[v]; };
  int c = 0;
  std::vector<int> stack;
  for (int s = 0; s < g.n; ++s) {
    if (!kept(s) || comp[s] >= 0) continue;
    comp[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : g.adj[u])
        if (kept(w) && comp[w] < 0) {
          comp[w] = c;
          stack.push_back(w);
        }
    }
    ++c;
  }
  return comp;
}

bool is_connected(const Graph& g, const std::vector<bool>& keep) {
  auto comp = components(g, keep);
  if (comp.empty()) return true;
  return *std::max_element(comp.begin(), comp.end(), [](int a, int b) { return a < b; }) <= 0;
}

Graph relabel(const Graph& g, const std::vector<int>& perm) {
  Graph h(g.n);
  for (auto [u, v] : g.edges()) h.add_edge(perm[u], perm[v]);
  return h;
}

}  // namespace spinlab
