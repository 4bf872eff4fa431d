// Brute-force transportation-feasibility oracle used only by tests.
//
// Searches column-stochastic matrices whose entries are multiples of 1/64
// for one that maps rho_in to rho_out while respecting an allowed-support
// mask. Exhaustive over the grid: columns are enumerated as compositions
// of 64 units over the allowed rows, with partial-sum pruning; the final
// occupied column is solved directly instead of enumerated. Deliberately
// shares no code with the production solver.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace transport_oracle {

constexpr int kGrid = 64;

struct Instance {
  std::vector<double> rho_in;
  std::vector<double> rho_out;
  // allow[i][j]: transport from source j to target i permitted.
  std::vector<std::vector<bool>> allow;
};

namespace detail {

struct Search {
  const Instance& inst;
  int n_out, n_in;
  std::vector<int> occupied;          // indices of columns with mass
  std::vector<double> partial;        // accumulated sum_j T[i,j]*rho_in[j]
  double tol;

  explicit Search(const Instance& i, double tolerance)
      : inst(i),
        n_out(static_cast<int>(i.rho_out.size())),
        n_in(static_cast<int>(i.rho_in.size())),
        partial(i.rho_out.size(), 0.0),
        tol(tolerance) {
    for (int j = 0; j < n_in; ++j)
      if (inst.rho_in[j] > 0) occupied.push_back(j);
    // Heavier columns first: they prune hardest, and the directly solved
    // final column is then the least constrained one.
    std::sort(occupied.begin(), occupied.end(), [&](int a, int b) {
      return inst.rho_in[a] > inst.rho_in[b];
    });
  }

  bool close_last_column(int j) {
    // Entries are forced: T[i,j] = (rho_out[i] - partial[i]) / rho_in[j].
    double mass = inst.rho_in[j];
    int units_used = 0;
    for (int i = 0; i < n_out; ++i) {
      double need = inst.rho_out[i] - partial[i];
      if (need < -tol) return false;
      double entry = need / mass;
      double scaled = entry * kGrid;
      long units = std::lround(scaled);
      if (std::fabs(scaled - units) * mass / kGrid > tol) return false;
      if (units < 0 || units > kGrid) return false;
      if (units > 0 && !inst.allow[i][j]) return false;
      units_used += static_cast<int>(units);
    }
    return units_used == kGrid;
  }

  bool fill_column(int col_pos, int row, int units_left) {
    int j = occupied[col_pos];
    if (row == n_out)
      return units_left == 0 && descend(col_pos + 1);
    int max_units = inst.allow[row][j] ? units_left : 0;
    double mass = inst.rho_in[j];
    for (int u = 0; u <= max_units; ++u) {
      double add = mass * u / kGrid;
      if (partial[row] + add > inst.rho_out[row] + tol) break;
      partial[row] += add;
      bool ok = fill_column(col_pos, row + 1, units_left - u);
      partial[row] -= add;
      if (ok) return true;
    }
    return false;
  }

  bool descend(int col_pos) {
    if (col_pos == static_cast<int>(occupied.size())) {
      for (int i = 0; i < n_out; ++i)
        if (std::fabs(partial[i] - inst.rho_out[i]) > tol) return false;
      return true;
    }
    if (col_pos + 1 == static_cast<int>(occupied.size()))
      return close_last_column(occupied[col_pos]);
    return fill_column(col_pos, 0, kGrid);
  }
};

}  // namespace detail

// True if some 1/64-grid stochastic matrix transports rho_in to rho_out
// (within tol per target) using only mask-allowed cells. A false result
// means the grid holds no witness, not that the instance is infeasible.
inline bool grid_feasible(const Instance& inst, double tol = 1e-9) {
  detail::Search s(inst, tol);
  if (s.occupied.empty()) return true;
  return s.descend(0);
}

}  // namespace transport_oracle
