#include "spinlab/graphs.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "spinlab/errors.hpp"

namespace spinlab {

namespace {

Error malformed(int line, const std::string& msg) {
  return Error(ErrorKind::MalformedInput, "line " + std::to_string(line) + ": " + msg);
}

bool parse_ints(const std::string& s, std::vector<long long>& out) {
  std::istringstream in(s);
  out.clear();
  std::string tok;
  while (in >> tok) {
    std::size_t pos = 0;
    long long v;
    try {
      v = std::stoll(tok, &pos);
    } catch (...) {
      return false;
    }
    if (pos != tok.size()) return false;
    out.push_back(v);
  }
  return true;
}

Rat rat_from_json(const json& j, const char* what) {
  if (j.is_string()) return parse_rat(j.get<std::string>());
  if (j.is_number_integer()) return Rat(mpz_class(std::to_string(j.get<long long>()), 10));
  if (j.is_number_float()) {
    // JSON floats are decimal text; go through the shortest round-trip string
    std::ostringstream os;
    os.precision(17);
    os << j.get<double>();
    return parse_rat(os.str());
  }
  throw Error(ErrorKind::MalformedInput, std::string("expected a rational for ") + what);
}

}  // namespace

Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<long long> nums;
  long long n = -1, m = -1, seen = 0;
  Graph g;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_ints(line, nums) || nums.size() != 2)
      throw malformed(lineno, "expected two integers, got '" + line + "'");
    if (n < 0) {
      n = nums[0];
      m = nums[1];
      if (n < 0 || m < 0 || n > 1000000) throw malformed(lineno, "bad header");
      g = Graph(static_cast<int>(n));
      continue;
    }
    if (nums[0] < 0 || nums[1] < 0 || nums[0] >= n || nums[1] >= n)
      throw malformed(lineno, "vertex out of range in '" + line + "'");
    try {
      g.add_edge(static_cast<int>(nums[0]), static_cast<int>(nums[1]));
    } catch (const Error& e) {
      throw malformed(lineno, e.what());
    }
    ++seen;
  }
  if (n < 0) throw malformed(lineno, "missing 'n m' header");
  if (seen != m)
    throw malformed(lineno, "header promised " + std::to_string(m) + " edges, found " +
                                std::to_string(seen));
  return g;
}

Graph parse_graph_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
    throw Error(ErrorKind::MalformedInput, "graph JSON needs integer field 'n'");
  long long n = j["n"].get<long long>();
  if (n < 0) throw Error(ErrorKind::MalformedInput, "negative n");
  Graph g(static_cast<int>(n));
  if (j.contains("edges")) {
    const auto& es = j["edges"];
    if (!es.is_array()) throw Error(ErrorKind::MalformedInput, "'edges' must be an array");
    for (std::size_t i = 0; i < es.size(); ++i) {
      const auto& e = es[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        throw Error(ErrorKind::MalformedInput, "edges[" + std::to_string(i) + "] is not a pair");
      try {
        g.add_edge(e[0].get<int>(), e[1].get<int>());
      } catch (const Error& err) {
        throw Error(ErrorKind::MalformedInput, "edges[" + std::to_string(i) + "]: " + err.what());
      }
    }
  }
  if (j.contains("order")) {
    auto ord = j["order"].get<std::vector<int>>();
    if (static_cast<long long>(ord.size()) != n)
      throw Error(ErrorKind::MalformedInput, "'order' must list every vertex");
    std::vector<int> seen(n, 0);
    for (std::size_t rank = 0; rank < ord.size(); ++rank) {
      int v = ord[rank];
      if (v < 0 || v >= n || seen[v]++)
        throw Error(ErrorKind::MalformedInput, "'order' is not a permutation");
      g.order[v] = static_cast<int>(rank);
    }
  }
  return g;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MalformedInput, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedInput, path + ": " + e.what());
  }
}

Graph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MalformedInput, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::MalformedInput, path + ": " + e.what());
    }
    return parse_graph_json(j);
  }
  try {
    return parse_edge_list(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

json graph_to_json(const Graph& g) {
  json j;
  j["n"] = g.n;
  j["edges"] = json::array();
  for (auto [u, v] : g.edges()) j["edges"].push_back({u, v});
  return j;
}

SpinParams parse_params_json(const json& j, int n) {
  if (!j.is_object()) throw Error(ErrorKind::MalformedInput, "params JSON must be an object");
  for (const char* k : {"beta", "gamma", "lambda"})
    if (!j.contains(k)) throw Error(ErrorKind::MalformedInput, std::string("params missing '") + k + "'");
  SpinParams p;
  p.beta = rat_from_json(j["beta"], "beta");
  p.gamma = rat_from_json(j["gamma"], "gamma");
  const auto& l = j["lambda"];
  if (l.is_array()) {
    for (const auto& x : l) p.lambda.push_back(rat_from_json(x, "lambda"));
  } else {
    p.lambda.assign(n, rat_from_json(l, "lambda"));
  }
  p.validate(n);
  return p;
}

json params_to_json(const SpinParams& p) {
  json j;
  j["beta"] = rat_str(p.beta);
  j["gamma"] = rat_str(p.gamma);
  if (p.uniform_field() && !p.lambda.empty()) {
    j["lambda"] = rat_str(p.lambda[0]);
  } else {
    j["lambda"] = json::array();
    for (const auto& l : p.lambda) j["lambda"].push_back(rat_str(l));
  }
  return j;
}

Boundary parse_boundary_json(const json& j) {
  Boundary bc;
  const json& src = (j.is_object() && j.contains("pinned")) ? j["pinned"] : j;
  auto put = [&](long long v, long long s) {
    if (s != 0 && s != 1) throw Error(ErrorKind::MalformedInput, "pinned spin must be 0 or 1");
    if (!bc.emplace(static_cast<int>(v), static_cast<int>(s)).second)
      throw Error(ErrorKind::MalformedInput, "vertex pinned twice");
  };
  if (src.is_object()) {
    for (auto it = src.begin(); it != src.end(); ++it) {
      std::size_t pos = 0;
      long long v = -1;
      try {
        v = std::stoll(it.key(), &pos);
      } catch (...) {
      }
      if (v < 0 || pos != it.key().size())
        throw Error(ErrorKind::MalformedInput, "bad boundary vertex '" + it.key() + "'");
      if (!it.value().is_number_integer())
        throw Error(ErrorKind::MalformedInput, "boundary spin must be an integer");
      put(v, it.value().get<long long>());
    }
  } else if (src.is_array()) {
    for (const auto& e : src) {
      if (!e.is_array() || e.size() != 2)
        throw Error(ErrorKind::MalformedInput, "boundary entries must be [vertex, spin]");
      put(e[0].get<long long>(), e[1].get<long long>());
    }
  } else {
    throw Error(ErrorKind::MalformedInput, "boundary JSON must be an object or array");
  }
  return bc;
}

json boundary_to_json(const Boundary& bc) {
  json j = json::object();
  for (auto [v, s] : bc) j[std::to_string(v)] = s;
  return j;
}

Graph path_graph(int n) {
  Graph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph cycle_graph(int n) {
  if (n < 3) throw Error(ErrorKind::InvalidParams, "cycle needs n >= 3");
  Graph g = path_graph(n);
  g.add_edge(n - 1, 0);
  return g;
}

Graph star_graph(int leaves) {
  Graph g(leaves + 1);
  for (int i = 1; i <= leaves; ++i) g.add_edge(0, i);
  return g;
}

Graph complete_graph(int n) {
  Graph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

Graph random_bounded_degree(int n, int max_degree, double p, CounterRng& rng,
                            bool require_connected) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Graph g(n);
    std::vector<std::pair<int, int>> pairs;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
    // random order so the degree cap does not bias toward low indices
    for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[rng.below(i)]);
    for (auto [u, v] : pairs)
      if (rng.uniform() < p && g.degree(u) < max_degree && g.degree(v) < max_degree)
        g.add_edge(u, v);
    if (!require_connected || is_connected(g)) return g;
  }
  throw Error(ErrorKind::InvalidParams, "could not sample a connected bounded-degree graph");
}

Graph random_regular(int n, int d, CounterRng& rng) {
  if ((static_cast<long long>(n) * d) % 2 || d >= n)
    throw Error(ErrorKind::InvalidParams, "no d-regular graph with these n, d");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<int> stubs;
    for (int v = 0; v < n; ++v)
      for (int k = 0; k < d; ++k) stubs.push_back(v);
    for (std::size_t i = stubs.size(); i > 1; --i) std::swap(stubs[i - 1], stubs[rng.below(i)]);
    Graph g(n);
    bool ok = true;
    for (std::size_t i = 0; ok && i < stubs.size(); i += 2) {
      int u = stubs[i], v = stubs[i + 1];
      if (u == v || g.has_edge(u, v)) ok = false;
      else g.add_edge(u, v);
    }
    if (ok) return g;
  }
  throw Error(ErrorKind::InvalidParams, "random_regular: too many rejections");
}

Graph random_tree(int n, CounterRng& rng) {
  Graph g(n);
  for (int v = 1; v < n; ++v) g.add_edge(v, static_cast<int>(rng.below(v)));
  return g;
}

std::uint64_t canonical_form(const Graph& g) {
  if (g.n > 8) throw Error(ErrorKind::CapExceeded, "canonical_form supports n <= 8");
  std::vector<int> perm(g.n);
  std::iota(perm.begin(), perm.end(), 0);
  auto es = g.edges();
  std::uint64_t best = ~0ULL;
  auto bit = [n = g.n](int a, int b) {
    if (a > b) std::swap(a, b);
    return a * n + b;
  };
  do {
    std::uint64_t code = 0;
    for (auto [u, v] : es) code |= 1ULL << bit(perm[u], perm[v]);
    best = std::min(best, code);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<Graph> connected_graphs_up_to_iso(int n) {
  if (n < 1 || n > 6) throw Error(ErrorKind::CapExceeded, "exhaustive enumeration supports 1 <= n <= 6");
  std::vector<std::pair<int, int>> slots;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) slots.emplace_back(u, v);
  std::set<std::uint64_t> seen;
  std::vector<Graph> out;
  const std::uint64_t total = 1ULL << slots.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    if (static_cast<int>(__builtin_popcountll(mask)) < n - 1) continue;
    Graph g(n);
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (mask >> i & 1) g.add_edge(slots[i].first, slots[i].second);
    if (!is_connected(g)) continue;
    if (seen.insert(canonical_form(g)).second) out.push_back(std::move(g));
  }
  return out;
}

}  // namespace spinlab
