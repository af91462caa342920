#include "mason/signalprint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mason {

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

double rejection_norm(const std::vector<double>& w) {
  double sum = 0.0;
  for (double x : w) sum += x;
  const double mean = sum / static_cast<double>(w.size());
  double sq = 0.0;
  for (double x : w) {
    const double c = x - mean;
    sq += c * c;
  }
  return std::sqrt(sq);
}

}  // namespace

double signalprint_distance(const std::vector<double>& a,
                            const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw DomainError("signalprint_distance: dimension too small");
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) w[i] = a[i] - b[i];
  return rejection_norm(w);
}

double signalprint_distance(const Signalprint& a, const Signalprint& b) {
  // align on shared observers present in both
  std::vector<double> w;
  w.reserve(a.observers.size());
  for (std::size_t i = 0; i < a.observers.size(); ++i) {
    if (!a.present[i]) continue;
    for (std::size_t j = 0; j < b.observers.size(); ++j) {
      if (b.present[j] && b.observers[j] == a.observers[i]) {
        w.push_back(a.values[i] - b.values[j]);
        break;
      }
    }
  }
  if (w.size() < 2)
    throw DomainError("signalprint_distance: fewer than 2 shared observers");
  return rejection_norm(w);
}

bool is_sybil_pair(const Signalprint& a, const Signalprint& b,
                   const SignalprintThresholds& t) {
  std::size_t shared = 0;
  for (std::size_t i = 0; i < a.observers.size(); ++i) {
    if (!a.present[i]) continue;
    for (std::size_t j = 0; j < b.observers.size(); ++j)
      if (b.present[j] && b.observers[j] == a.observers[i]) {
        ++shared;
        break;
      }
  }
  if (shared < 2) throw DomainError("is_sybil_pair: dimension too small");
  return signalprint_distance(a, b) <= t.distance_threshold(shared);
}

Signalprint build_signalprint(const ReceiverSet& r, IdentityId transmitter,
                              const ObservationMatrix& obs) {
  Signalprint sp;
  for (IdentityId m : r.members) {
    if (m == transmitter) continue;
    double v = 0.0;
    const bool ok = obs.mean(m, transmitter, v);
    sp.observers.push_back(m);
    sp.values.push_back(ok ? v : 0.0);
    sp.present.push_back(ok ? 1 : 0);
  }
  return sp;
}

View generate_view(const ReceiverSet& r, const ObservationMatrix& obs,
                   const SignalprintThresholds& t) {
  const std::size_t n = obs.identity_count();
  View view(n);

  std::vector<Signalprint> prints(n);
  std::vector<std::uint8_t> usable(n, 0);
  for (IdentityId j = 0; j < n; ++j) {
    prints[j] = build_signalprint(r, j, obs);
    usable[j] = prints[j].dimension() >= 2;
  }

  UnionFind uf(n);

  // Size-2 receiver sets yield one-dimensional line intercepts; cluster by
  // sorting instead of the quadratic pairwise pass.
  const bool fast2 = r.size() == 2;
  std::vector<IdentityId> pool;
  for (IdentityId j = 0; j < n; ++j) {
    if (r.contains(j)) continue;
    if (!usable[j]) continue;
    pool.push_back(j);
  }

  if (fast2) {
    std::vector<std::pair<double, IdentityId>> pts;
    pts.reserve(pool.size());
    for (IdentityId j : pool)
      pts.emplace_back(prints[j].values[0] - prints[j].values[1], j);
    std::sort(pts.begin(), pts.end());
    const double gap = t.distance_threshold(2) * std::sqrt(2.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i].first - pts[i - 1].first <= gap)
        uf.unite(pts[i].second, pts[i - 1].second);
  } else {
    for (std::size_t a = 0; a < pool.size(); ++a) {
      for (std::size_t b = a + 1; b < pool.size(); ++b) {
        const Signalprint& pa = prints[pool[a]];
        const Signalprint& pb = prints[pool[b]];
        std::size_t shared = 0;
        for (std::size_t i = 0; i < pa.observers.size(); ++i)
          if (pa.present[i] && pb.present[i]) ++shared;
        if (shared < 2) continue;
        std::vector<double> w;
        w.reserve(shared);
        for (std::size_t i = 0; i < pa.observers.size(); ++i)
          if (pa.present[i] && pb.present[i])
            w.push_back(pa.values[i] - pb.values[i]);
        double sum = 0.0;
        for (double x : w) sum += x;
        const double mean = sum / static_cast<double>(w.size());
        double sq = 0.0;
        for (double x : w) sq += (x - mean) * (x - mean);
        if (std::sqrt(sq) <= t.distance_threshold(shared))
          uf.unite(pool[a], pool[b]);
      }
    }
  }

  std::vector<std::uint32_t> cluster_size(n, 0);
  for (IdentityId j : pool) ++cluster_size[uf.find(j)];

  view.cluster.resize(n);
  for (IdentityId j = 0; j < n; ++j) view.cluster[j] = uf.find(j);

  for (IdentityId j = 0; j < n; ++j) {
    if (r.contains(j)) {
      view.set_label(j, View::Label::NonSybil);
    } else if (!usable[j]) {
      view.set_label(j, View::Label::Rejected);
    } else if (cluster_size[uf.find(j)] >= 2) {
      view.set_label(j, View::Label::Sybil);
    } else {
      view.set_label(j, View::Label::NonSybil);
    }
  }
  return view;
}

}  // namespace mason
