// Stochastic transfer matrices that transport Born distributions across
// steps, plus the support-constrained feasibility test with cut
// certificates.
#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pwl/core.hpp"
#include "pwl/netflow.hpp"

namespace pwl {

// Column-stochastic on source_support columns; T[out][in] is the
// probability of moving to out given the particle sits at in. Columns
// with (numerically) zero source mass are not part of the contract; they
// are stored as uniform rows so serialization stays deterministic.
struct TransferMatrix {
  ConfigSpace from;
  ConfigSpace to;
  std::vector<std::vector<double>> p;  // p[out][in]
  std::vector<char> source_support;    // per in-label
  bool repaired = false;

  double at(const std::string& out, const std::string& in) const {
    int i = to.index_of(out), j = from.index_of(in);
    if (i < 0 || j < 0) throw std::invalid_argument("unknown label");
    return p[i][j];
  }
};

// A[out][in] = conj((U psi)_out) * U[out][in] * psi_in. Columns sum to the
// source Born weights and rows to the target Born weights.
struct FlowMatrix {
  ConfigSpace from;
  ConfigSpace to;
  std::vector<std::vector<complex>> a;  // a[out][in]

  complex at(const std::string& out, const std::string& in) const {
    int i = to.index_of(out), j = from.index_of(in);
    if (i < 0 || j < 0) throw std::invalid_argument("unknown label");
    return a[i][j];
  }
};

// Which transitions a locality rule permits.
struct SupportMask {
  ConfigSpace from;
  ConfigSpace to;
  std::vector<std::vector<char>> allow;  // allow[out][in]
  std::string description;

  bool allows(const std::string& out, const std::string& in) const {
    int i = to.index_of(out), j = from.index_of(in);
    if (i < 0 || j < 0) throw std::invalid_argument("unknown label");
    return allow[i][j] != 0;
  }
};

// Hall-type witness of infeasibility: the targets in `targets` need more
// mass than every source able to reach them can supply.
struct CutCertificate {
  std::vector<std::string> targets;
  std::vector<std::string> reachable_sources;
  double required_mass = 0;
  double reachable_mass = 0;
};

struct FeasibilityResult {
  bool feasible = false;
  std::optional<TransferMatrix> transfer;
  std::optional<CutCertificate> certificate;
};

inline Distribution born_distribution(const WaveFunction& psi,
                                      bool allow_subnormalized = false) {
  double n2 = psi.norm2();
  if (!allow_subnormalized && std::fabs(n2 - 1.0) > 1e-9)
    throw std::invalid_argument("wave function is not normalized");
  Distribution d;
  d.space = psi.space;
  d.p.resize(psi.amp.size());
  for (size_t i = 0; i < psi.amp.size(); ++i) d.p[i] = std::norm(psi.amp[i]);
  return d;
}

inline FlowMatrix flow_matrix(const StepOperator& step,
                              const WaveFunction& psi) {
  if (step.kind == StepKind::filter)
    throw std::invalid_argument(
        "flow matrix undefined for filter steps; use project");
  WaveFunction out = apply_step(step, psi);
  FlowMatrix flow;
  flow.from = step.from;
  flow.to = step.to;
  flow.a.assign(step.to.dim(), std::vector<complex>(step.from.dim()));
  for (int i = 0; i < step.to.dim(); ++i)
    for (int j = 0; j < step.from.dim(); ++j)
      flow.a[i][j] = std::conj(out.amp[i]) * step.m[i][j] * psi.amp[j];
  return flow;
}

namespace detail {

inline std::vector<double> flow_column_sums(const FlowMatrix& flow) {
  std::vector<double> rho(flow.from.dim(), 0.0);
  for (int j = 0; j < flow.from.dim(); ++j)
    for (int i = 0; i < flow.to.dim(); ++i) rho[j] += flow.a[i][j].real();
  return rho;
}

inline std::vector<double> flow_row_sums(const FlowMatrix& flow) {
  std::vector<double> rho(flow.to.dim(), 0.0);
  for (int i = 0; i < flow.to.dim(); ++i)
    for (int j = 0; j < flow.from.dim(); ++j) rho[i] += flow.a[i][j].real();
  return rho;
}

// Column-normalized transfer entries from an integer transport plan.
// allowed_rows steers the filler for zero-mass columns; empty means all.
inline TransferMatrix transfer_from_plan(
    const ConfigSpace& from, const ConfigSpace& to,
    const std::vector<std::vector<std::int64_t>>& plan,
    const std::vector<char>& support,
    const std::vector<std::vector<char>>& allowed_rows) {
  TransferMatrix t;
  t.from = from;
  t.to = to;
  t.source_support = support;
  t.p.assign(to.dim(), std::vector<double>(from.dim(), 0.0));
  for (int j = 0; j < from.dim(); ++j) {
    std::int64_t col = 0;
    for (int i = 0; i < to.dim(); ++i) col += plan[i][j];
    if (col > 0) {
      for (int i = 0; i < to.dim(); ++i)
        t.p[i][j] =
            static_cast<double>(plan[i][j]) / static_cast<double>(col);
    } else {
      int n_allowed = 0;
      for (int i = 0; i < to.dim(); ++i)
        if (allowed_rows.empty() || allowed_rows[i][j]) ++n_allowed;
      for (int i = 0; i < to.dim(); ++i) {
        bool ok = allowed_rows.empty() || allowed_rows[i][j] || n_allowed == 0;
        t.p[i][j] = ok ? 1.0 / (n_allowed > 0 ? n_allowed : to.dim()) : 0.0;
      }
    }
  }
  return t;
}

}  // namespace detail

inline TransferMatrix transfer_from_flow(const FlowMatrix& flow) {
  int n_out = flow.to.dim(), n_in = flow.from.dim();
  std::vector<double> rho = detail::flow_column_sums(flow);
  std::vector<char> support(n_in);
  for (int j = 0; j < n_in; ++j) support[j] = rho[j] > kTol ? 1 : 0;

  double min_entry = 0;
  for (const auto& row : flow.a)
    for (const complex& a : row) min_entry = std::min(min_entry, a.real());

  TransferMatrix t;
  t.from = flow.from;
  t.to = flow.to;
  t.source_support = support;
  t.p.assign(n_out, std::vector<double>(n_in, 0.0));

  if (min_entry >= -1e-12) {
    // Clip the numerical dust and renormalize each occupied column.
    for (int j = 0; j < n_in; ++j) {
      double col = 0;
      for (int i = 0; i < n_out; ++i)
        col += std::max(flow.a[i][j].real(), 0.0);
      for (int i = 0; i < n_out; ++i)
        t.p[i][j] = col > 0 ? std::max(flow.a[i][j].real(), 0.0) / col
                            : 1.0 / n_out;
    }
    return t;
  }

  // Genuinely negative flow: least-modification transport. Move the Born
  // marginals with a min-cost plan that pays 1 per unit of mass routed
  // through cells whose flow is not positive.
  t.repaired = true;
  std::vector<double> rho_out = detail::flow_row_sums(flow);
  for (double& w : rho) w = std::max(w, 0.0);
  for (double& w : rho_out) w = std::max(w, 0.0);
  auto supply = netflow::quantize_masses(rho);
  auto demand = netflow::quantize_masses(rho_out);
  int s = n_in + n_out, tt = s + 1;
  netflow::FlowNetwork net(n_in + n_out + 2);
  std::vector<std::vector<int>> edge_id(n_out, std::vector<int>(n_in, -1));
  for (int j = 0; j < n_in; ++j) net.add_edge(s, j, supply[j]);
  for (int i = 0; i < n_out; ++i) net.add_edge(n_in + i, tt, demand[i]);
  for (int j = 0; j < n_in; ++j)
    for (int i = 0; i < n_out; ++i)
      edge_id[i][j] = net.add_edge(j, n_in + i, netflow::kMassUnits + 1,
                                   flow.a[i][j].real() > 0 ? 0 : 1);
  net.min_cost_max_flow(s, tt);
  std::vector<std::vector<std::int64_t>> plan(
      n_out, std::vector<std::int64_t>(n_in, 0));
  for (int i = 0; i < n_out; ++i)
    for (int j = 0; j < n_in; ++j) plan[i][j] = net.flow_on(edge_id[i][j]);
  t = detail::transfer_from_plan(flow.from, flow.to, plan, support, {});
  t.repaired = true;
  return t;
}

inline FeasibilityResult feasibility_check(const Distribution& rho_in,
                                           const Distribution& rho_out,
                                           const SupportMask& mask) {
  if (!(mask.from == rho_in.space) || !(mask.to == rho_out.space))
    throw std::invalid_argument("mask spaces do not match the marginals");
  int n_in = rho_in.space.dim(), n_out = rho_out.space.dim();
  std::vector<char> support(n_in);
  for (int j = 0; j < n_in; ++j) {
    support[j] = rho_in.p[j] > kTol ? 1 : 0;
    if (!support[j]) continue;
    bool any = false;
    for (int i = 0; i < n_out; ++i) any = any || mask.allow[i][j];
    if (!any) {
      std::ostringstream msg;
      msg << "mask allows no transition out of occupied label '"
          << rho_in.space.labels[j] << "'";
      throw std::invalid_argument(msg.str());
    }
  }

  auto supply = netflow::quantize_masses(rho_in.p);
  auto demand = netflow::quantize_masses(rho_out.p);
  int s = n_in + n_out, t = s + 1;
  netflow::FlowNetwork net(n_in + n_out + 2);
  std::vector<std::vector<int>> edge_id(n_out, std::vector<int>(n_in, -1));
  for (int j = 0; j < n_in; ++j) net.add_edge(s, j, supply[j]);
  for (int i = 0; i < n_out; ++i) net.add_edge(n_in + i, t, demand[i]);
  for (int j = 0; j < n_in; ++j)
    for (int i = 0; i < n_out; ++i)
      if (mask.allow[i][j])
        edge_id[i][j] = net.add_edge(j, n_in + i, netflow::kMassUnits + 1);

  std::int64_t shortfall = netflow::kMassUnits - net.max_flow(s, t);
  FeasibilityResult result;
  if (shortfall <= netflow::kFeasibilitySlack) {
    result.feasible = true;
    std::vector<std::vector<std::int64_t>> plan(
        n_out, std::vector<std::int64_t>(n_in, 0));
    for (int i = 0; i < n_out; ++i)
      for (int j = 0; j < n_in; ++j)
        if (edge_id[i][j] >= 0) plan[i][j] = net.flow_on(edge_id[i][j]);
    result.transfer = detail::transfer_from_plan(
        rho_in.space, rho_out.space, plan, support, mask.allow);
    return result;
  }

  result.feasible = false;
  CutCertificate cert;
  auto reach = net.residual_reachable(s);
  std::vector<char> in_cut(n_out, 0);
  for (int i = 0; i < n_out; ++i)
    if (!reach[n_in + i]) {
      in_cut[i] = 1;
      cert.targets.push_back(rho_out.space.labels[i]);
      cert.required_mass += rho_out.p[i];
    }
  for (int j = 0; j < n_in; ++j) {
    bool reaches_cut = false;
    for (int i = 0; i < n_out; ++i)
      reaches_cut = reaches_cut || (in_cut[i] && mask.allow[i][j]);
    if (reaches_cut) {
      cert.reachable_sources.push_back(rho_in.space.labels[j]);
      cert.reachable_mass += rho_in.p[j];
    }
  }
  result.certificate = std::move(cert);
  return result;
}

}  // namespace pwl
