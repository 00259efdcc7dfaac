#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

namespace {

constexpr double kEps = 1e-11;

// Tableau with m constraint rows and one objective row (index m). Column
// `cols` holds the right-hand side. The objective row stores -c so that a
// negative entry marks an improving column.
struct Tableau {
  std::size_t m;
  std::size_t cols;
  std::vector<double> t;
  std::vector<std::size_t> basis;

  double& at(std::size_t r, std::size_t c) { return t[r * (cols + 1) + c]; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c <= cols; ++c) at(pr, c) /= p;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols; ++c) at(r, c) -= f * at(pr, c);
    }
    basis[pr] = pc;
  }

  // Returns false when unbounded. `allowed` masks columns that may enter.
  bool optimize(const std::vector<char>& allowed) {
    for (std::size_t guard = 0; guard < 100000; ++guard) {
      std::size_t pc = cols;
      for (std::size_t c = 0; c < cols; ++c) {
        if (allowed[c] && at(m, c) < -kEps) {
          pc = c;
          break;  // Bland: smallest improving index
        }
      }
      if (pc == cols) return true;
      std::size_t pr = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m; ++r) {
        const double a = at(r, pc);
        if (a > kEps) {
          const double ratio = at(r, cols) / a;
          if (pr == m || ratio < best - 1e-15 ||
              (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[pr])) {
            best = ratio;
            pr = r;
          }
        }
      }
      if (pr == m) return false;
      pivot(pr, pc);
    }
    throw std::runtime_error("simplex oracle: iteration guard hit");
  }
};

}  // namespace

LpResult simplex_max(const std::vector<double>& c, const std::vector<LpRow>& rows_in) {
  const std::size_t n = c.size();
  std::vector<LpRow> rows = rows_in;
  for (auto& row : rows) {
    row.a.resize(n, 0.0);
    if (row.b < 0.0) {
      for (double& v : row.a) v = -v;
      row.b = -row.b;
      if (row.sense == '<') {
        row.sense = '>';
      } else if (row.sense == '>') {
        row.sense = '<';
      }
    }
  }
  const std::size_t m = rows.size();
  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  for (const auto& row : rows) {
    if (row.sense != '=') ++n_slack;
    if (row.sense != '<') ++n_art;
  }
  const std::size_t cols = n + n_slack + n_art;
  Tableau tab{m, cols, std::vector<double>((m + 1) * (cols + 1), 0.0), std::vector<std::size_t>(m)};
  std::vector<char> is_art(cols, 0);
  std::size_t slack = n;
  std::size_t art = n + n_slack;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) tab.at(r, j) = rows[r].a[j];
    tab.at(r, cols) = rows[r].b;
    if (rows[r].sense == '<') {
      tab.at(r, slack) = 1.0;
      tab.basis[r] = slack++;
    } else {
      if (rows[r].sense == '>') tab.at(r, slack++) = -1.0;
      tab.at(r, art) = 1.0;
      is_art[art] = 1;
      tab.basis[r] = art++;
    }
  }

  // Phase 1: maximize -(sum of artificials).
  for (std::size_t r = 0; r < m; ++r) {
    if (!is_art[tab.basis[r]]) continue;
    for (std::size_t col = 0; col <= cols; ++col) tab.at(m, col) -= tab.at(r, col);
  }
  for (std::size_t col = 0; col < cols; ++col) {
    if (is_art[col]) tab.at(m, col) = 0.0;
  }
  std::vector<char> all(cols, 1);
  tab.optimize(all);
  LpResult out;
  if (tab.at(m, cols) < -1e-9) return out;  // infeasible
  out.feasible = true;

  // Drive remaining artificials out of the basis.
  for (std::size_t r = 0; r < m; ++r) {
    if (!is_art[tab.basis[r]]) continue;
    for (std::size_t col = 0; col < cols; ++col) {
      if (!is_art[col] && std::abs(tab.at(r, col)) > 1e-9) {
        tab.pivot(r, col);
        break;
      }
    }
  }

  // Phase 2.
  std::fill(tab.t.begin() + static_cast<std::ptrdiff_t>(m * (cols + 1)), tab.t.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) tab.at(m, j) = -c[j];
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = tab.basis[r];
    if (b < n && c[b] != 0.0) {
      const double f = tab.at(m, b);
      for (std::size_t col = 0; col <= cols; ++col) tab.at(m, col) -= f * tab.at(r, col);
    }
  }
  std::vector<char> allowed(cols, 1);
  for (std::size_t col = 0; col < cols; ++col) {
    if (is_art[col]) allowed[col] = 0;
  }
  if (!tab.optimize(allowed)) {
    out.bounded = false;
    return out;
  }
  out.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis[r] < n) out.x[tab.basis[r]] = tab.at(r, cols);
  }
  out.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.value += c[j] * out.x[j];
  return out;
}

Atoms atoms_of(const kmeasure::DiscreteMeasure& mu) {
  Atoms out;
  for (std::size_t k = 0; k < mu.size(); ++k) out.emplace_back(mu.location(k), mu.weight(k));
  return out;
}

double transport_w1(const Atoms& mu, const Atoms& nu) {
  const std::size_t a = mu.size();
  const std::size_t b = nu.size();
  std::vector<double> c(a * b);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) c[i * b + j] = -std::abs(mu[i].first - nu[j].first);
  }
  std::vector<LpRow> rows;
  for (std::size_t i = 0; i < a; ++i) {
    LpRow row{std::vector<double>(a * b, 0.0), '=', mu[i].second};
    for (std::size_t j = 0; j < b; ++j) row.a[i * b + j] = 1.0;
    rows.push_back(std::move(row));
  }
  for (std::size_t j = 0; j < b; ++j) {
    LpRow row{std::vector<double>(a * b, 0.0), '=', nu[j].second};
    for (std::size_t i = 0; i < a; ++i) row.a[i * b + j] = 1.0;
    rows.push_back(std::move(row));
  }
  const LpResult res = simplex_max(c, rows);
  if (!res.feasible || !res.bounded) throw std::runtime_error("transport oracle failed");
  return -res.value;
}

double quantile_w1(const Atoms& mu_in, const Atoms& nu_in) {
  Atoms mu = mu_in;
  Atoms nu = nu_in;
  std::sort(mu.begin(), mu.end());
  std::sort(nu.begin(), nu.end());
  double tm = 0.0;
  double tn = 0.0;
  for (auto& [x, w] : mu) tm += w;
  for (auto& [x, w] : nu) tn += w;
  // Walk both quantile functions over p in (0, 1).
  std::size_t i = 0;
  std::size_t j = 0;
  double left_i = mu[0].second / tm;
  double left_j = nu[0].second / tn;
  double total = 0.0;
  while (i < mu.size() && j < nu.size()) {
    const double step = std::min(left_i, left_j);
    total += step * std::abs(mu[i].first - nu[j].first);
    left_i -= step;
    left_j -= step;
    if (left_i <= 1e-15) {
      if (++i < mu.size()) left_i += mu[i].second / tm;
    }
    if (left_j <= 1e-15) {
      if (++j < nu.size()) left_j += nu[j].second / tn;
    }
  }
  return total;
}

namespace {

struct Merged {
  std::vector<double> x;
  std::vector<double> diff;  // mu - nu
};

Merged merge(const Atoms& mu, const Atoms& nu) {
  std::map<double, double> m;
  for (auto& [x, w] : mu) m[x] += w;
  for (auto& [x, w] : nu) m[x] -= w;
  Merged out;
  for (auto& [x, d] : m) {
    out.x.push_back(x);
    out.diff.push_back(d);
  }
  return out;
}

}  // namespace

double fortet_mourier_lp(const Atoms& mu, const Atoms& nu) {
  const Merged mg = merge(mu, nu);
  const std::size_t k = mg.x.size();
  // f = g - 1 with 0 <= g <= 2.
  std::vector<double> c = mg.diff;
  double shift = 0.0;
  for (double d : mg.diff) shift -= d;
  std::vector<LpRow> rows;
  for (std::size_t i = 0; i < k; ++i) {
    LpRow row{std::vector<double>(k, 0.0), '<', 2.0};
    row.a[i] = 1.0;
    rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const double gap = mg.x[i + 1] - mg.x[i];
    LpRow up{std::vector<double>(k, 0.0), '<', gap};
    up.a[i + 1] = 1.0;
    up.a[i] = -1.0;
    LpRow down{std::vector<double>(k, 0.0), '<', gap};
    down.a[i + 1] = -1.0;
    down.a[i] = 1.0;
    rows.push_back(std::move(up));
    rows.push_back(std::move(down));
  }
  const LpResult res = simplex_max(c, rows);
  if (!res.feasible || !res.bounded) throw std::runtime_error("FM oracle failed");
  return res.value + shift;
}

double zeta_grid_lp(const Atoms& mu, const Atoms& nu, const std::vector<double>& grid_in,
                    double r) {
  std::vector<double> grid = grid_in;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty() || grid.front() != 0.0) throw std::runtime_error("grid must start at 0");
  const std::size_t k = grid.size();
  // H_j(x) = integral over [0, x] of the hat function centred at grid[j];
  // the last hat is a half-hat that stays at 1 beyond the last point.
  auto hat_integral = [&](std::size_t j, double x) {
    auto hat = [&](double t) {
      if (j > 0 && t >= grid[j - 1] && t <= grid[j]) {
        return (t - grid[j - 1]) / (grid[j] - grid[j - 1]);
      }
      if (j + 1 < k && t >= grid[j] && t <= grid[j + 1]) {
        return (grid[j + 1] - t) / (grid[j + 1] - grid[j]);
      }
      if (j + 1 == k && t >= grid[j]) return 1.0;
      return 0.0;
    };
    // The hat is linear on each grid cell, so Simpson's rule is exact there.
    double total = 0.0;
    double a = 0.0;
    for (std::size_t q = 1; q <= k && a < x; ++q) {
      const double b = q < k ? std::min(grid[q], x) : x;
      if (b > a) total += (b - a) / 6.0 * (hat(a) + 4.0 * hat(0.5 * (a + b)) + hat(b));
      a = b;
    }
    return total;
  };
  const Merged mg = merge(mu, nu);
  // Variables: g_j = u_j - v_j for j >= 1 (g_0 = 0).
  const std::size_t nv = 2 * (k - 1);
  std::vector<double> c(nv, 0.0);
  for (std::size_t j = 1; j < k; ++j) {
    double cj = 0.0;
    for (std::size_t a = 0; a < mg.x.size(); ++a) cj += mg.diff[a] * hat_integral(j, mg.x[a]);
    c[2 * (j - 1)] = cj;
    c[2 * (j - 1) + 1] = -cj;
  }
  std::vector<LpRow> rows;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double cap = std::pow(grid[j] - grid[i], r - 1.0);
      for (double s : {1.0, -1.0}) {
        LpRow row{std::vector<double>(nv, 0.0), '<', cap};
        row.a[2 * (j - 1)] += s;
        row.a[2 * (j - 1) + 1] -= s;
        if (i > 0) {
          row.a[2 * (i - 1)] -= s;
          row.a[2 * (i - 1) + 1] += s;
        }
        rows.push_back(std::move(row));
      }
    }
  }
  const LpResult res = simplex_max(c, rows);
  if (!res.feasible || !res.bounded) throw std::runtime_error("zeta oracle failed");
  return res.value;
}

namespace {

Atoms combine(const Atoms& a, const Atoms& b, bool product) {
  std::map<double, double> m;
  for (auto& [x, w] : a) {
    for (auto& [y, v] : b) m[product ? x * y : x + y] += w * v;
  }
  return Atoms(m.begin(), m.end());
}

}  // namespace

Atoms pair_sums(const Atoms& a, const Atoms& b) { return combine(a, b, false); }
Atoms pair_products(const Atoms& a, const Atoms& b) { return combine(a, b, true); }

double moment(const Atoms& mu, double r) {
  double total = 0.0;
  for (auto& [x, w] : mu) total += w * std::pow(x, r);
  return total;
}

Atoms random_atoms(std::mt19937_64& rng, std::size_t n, double max_location) {
  std::uniform_real_distribution<double> loc(0.0, max_location);
  std::uniform_real_distribution<double> wt(0.05, 1.0);
  Atoms out;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.emplace_back(loc(rng), wt(rng));
    total += out.back().second;
  }
  for (auto& [x, w] : out) w /= total;
  return out;
}

Atoms random_unit_mean(std::mt19937_64& rng, std::size_t n, double max_location) {
  Atoms out = random_atoms(rng, n, max_location);
  const double m = moment(out, 1.0);
  for (auto& [x, w] : out) x /= m;
  return out;
}

kmeasure::DiscreteMeasure to_measure(const Atoms& atoms) {
  std::vector<double> x;
  std::vector<double> w;
  for (auto& [a, b] : atoms) {
    x.push_back(a);
    w.push_back(b);
  }
  return kmeasure::DiscreteMeasure::make(std::move(x), std::move(w));
}

}  // namespace oracle
