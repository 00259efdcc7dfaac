#include "transport.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "kmeasure/error.hpp"

namespace kmeasure::detail {

double min_cost_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                          const std::function<double(std::size_t, std::size_t)>& cost) {
  const std::size_t ns = supply.size();
  const std::size_t nt = demand.size();
  if (ns == 0 || nt == 0) return 0.0;
  const double total = std::max(std::accumulate(supply.begin(), supply.end(), 0.0),
                                std::accumulate(demand.begin(), demand.end(), 0.0));
  if (!(total > 0.0)) return 0.0;
  const double tol = 1e-14 * total;

  std::vector<double> c(ns * nt);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t t = 0; t < nt; ++t) c[s * nt + t] = cost(s, t);
  }
  std::vector<double> flow(ns * nt, 0.0);
  std::vector<double> a = supply;
  std::vector<double> b = demand;
  const std::size_t n = ns + nt;  // sources first, then sinks
  std::vector<double> potential(n, 0.0);
  std::vector<double> dist(n);
  std::vector<std::size_t> pred(n);
  std::vector<char> done(n);
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

  auto remaining = [tol](const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [tol](double x) { return x > tol; });
  };

  const std::size_t max_rounds = 4 * n * n + 100;
  std::size_t rounds = 0;
  while (remaining(a) && remaining(b)) {
    if (++rounds > max_rounds) {
      throw Error(ErrorCode::LpFailure, "transport augmentation did not terminate");
    }
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(pred.begin(), pred.end(), none);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t s = 0; s < ns; ++s) {
      if (a[s] > tol) dist[s] = 0.0;
    }
    for (std::size_t iter = 0; iter < n; ++iter) {
      std::size_t u = none;
      for (std::size_t v = 0; v < n; ++v) {
        if (!done[v] && dist[v] < inf && (u == none || dist[v] < dist[u])) u = v;
      }
      if (u == none) break;
      done[u] = 1;
      if (u < ns) {
        for (std::size_t t = 0; t < nt; ++t) {
          const std::size_t v = ns + t;
          if (done[v]) continue;
          const double reduced = std::max(0.0, c[u * nt + t] + potential[u] - potential[v]);
          if (dist[u] + reduced < dist[v]) {
            dist[v] = dist[u] + reduced;
            pred[v] = u;
          }
        }
      } else {
        const std::size_t t = u - ns;
        for (std::size_t s = 0; s < ns; ++s) {
          if (done[s] || !(flow[s * nt + t] > 0.0)) continue;
          const double reduced = std::max(0.0, -c[s * nt + t] + potential[u] - potential[s]);
          if (dist[u] + reduced < dist[s]) {
            dist[s] = dist[u] + reduced;
            pred[s] = u;
          }
        }
      }
    }

    std::size_t sink = none;
    for (std::size_t t = 0; t < nt; ++t) {
      const std::size_t v = ns + t;
      if (b[t] > tol && dist[v] < inf && (sink == none || dist[v] < dist[sink])) sink = v;
    }
    if (sink == none) throw Error(ErrorCode::LpFailure, "no augmenting path in transport");

    double amount = b[sink - ns];
    std::size_t v = sink;
    while (pred[v] != none) {
      const std::size_t u = pred[v];
      if (u >= ns) amount = std::min(amount, flow[v * nt + (u - ns)]);  // reverse edge t -> s
      v = u;
    }
    amount = std::min(amount, a[v]);
    const std::size_t source = v;

    v = sink;
    while (pred[v] != none) {
      const std::size_t u = pred[v];
      if (u < ns) {
        flow[u * nt + (v - ns)] += amount;
      } else {
        double& f = flow[v * nt + (u - ns)];
        f = std::max(0.0, f - amount);
      }
      v = u;
    }
    a[source] -= amount;
    b[sink - ns] -= amount;

    double reach = 0.0;
    for (double d : dist) {
      if (d < inf) reach = std::max(reach, d);
    }
    for (std::size_t k = 0; k < n; ++k) potential[k] += dist[k] < inf ? dist[k] : reach;
  }

  double value = 0.0;
  for (std::size_t k = 0; k < ns * nt; ++k) value += flow[k] * c[k];
  return value;
}

}  // namespace kmeasure::detail
