// Mechanical audit of the four dynamical principles against an experiment
// and a sampled ensemble: wave autonomy, Born statistics, stationarity of
// conserved registers, and locality masks — plus the transportation
// certificate showing when no transfer policy can satisfy all of them.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pwl/core.hpp"
#include "pwl/ensemble.hpp"
#include "pwl/guidance.hpp"

namespace pwl {

enum class Verdict { holds, violated, not_applicable };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    default: return "not-applicable";
  }
}

// Normal 99.99% quantile; chi-square quantiles via Wilson-Hilferty. The
// approximation sits slightly above the exact quantile at low dof, so the
// Born check errs on the lenient side.
inline constexpr double kChiSquareZ = 3.719016485455568;

inline double chi_square_quantile_9999(int dof) {
  double d = static_cast<double>(dof);
  double u = 1.0 - 2.0 / (9.0 * d) + kChiSquareZ * std::sqrt(2.0 / (9.0 * d));
  return d * u * u * u;
}

struct LabelStat {
  std::string label;
  std::int64_t observed = 0;
  double expected = 0;  // probability mass
};

struct BornStageEvidence {
  int stage = 0;
  double statistic = 0;
  double threshold = 0;
  int dof = 0;
  std::vector<LabelStat> zero_occupied;  // occupied labels with zero Born mass
  std::vector<LabelStat> labels;         // full per-label table
};

struct BornCheck {
  Verdict verdict = Verdict::not_applicable;
  std::vector<int> stages_checked;
  std::optional<BornStageEvidence> failure;
};

struct StationarityCheck {
  Verdict verdict = Verdict::not_applicable;
  std::vector<int> steps_checked;  // steps where wave is real and the step
                                   // conserves its source registers
  std::optional<int> step;         // offending step when violated
  std::string column;              // source label whose mass moves
  std::string target;              // where it moves to
  double mass = 0;
};

struct TransitionCount {
  int step = 0;
  std::string from, to;
  std::int64_t count = 0;
};

struct LocalityCheck {
  Verdict verdict = Verdict::not_applicable;
  std::vector<int> steps_checked;
  std::int64_t transitions = 0;  // alive transitions across masked steps
  std::int64_t violations = 0;
  std::vector<TransitionCount> offending;
};

struct CertificateCheck {
  bool applicable = false;  // the spec carries at least one mask
  bool feasible = true;
  std::optional<int> step;  // first infeasible step
  std::optional<CutCertificate> certificate;
};

struct AuditReport {
  Verdict wave_autonomy = Verdict::holds;
  std::string wave_autonomy_note;
  BornCheck born;
  StationarityCheck stationarity;
  LocalityCheck locality;
  CertificateCheck certificate;
  bool consistent = true;
  std::string conclusion;
};

namespace detail {

inline std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

inline void require_matching_ensemble(const ExperimentSpec& spec,
                                      const TrajectoryEnsemble& ens) {
  if (ens.spaces != spec.spaces)
    throw std::invalid_argument(
        "ensemble does not match the experiment's configuration spaces");
}

// True when `from` appears as the leading factors of `to`: the step keeps
// the source registers intact and at most appends new ones.
inline bool factor_prefix(const std::string& from, const std::string& to) {
  auto a = split_factors(from), b = split_factors(to);
  if (a.size() > b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

inline bool step_conserves_registers(const StepOperator& step) {
  for (int i = 0; i < step.to.dim(); ++i)
    for (int j = 0; j < step.from.dim(); ++j)
      if (std::abs(step.m[static_cast<std::size_t>(i)]
                         [static_cast<std::size_t>(j)]) > kTol &&
          !factor_prefix(step.from.labels[static_cast<std::size_t>(j)],
                         step.to.labels[static_cast<std::size_t>(i)]))
        return false;
  return true;
}

}  // namespace detail

// Empirical stage occupancies against the exact Born distributions:
// zero-amplitude labels must be empty, and every stage must pass a
// chi-square test at the 99.99% quantile.
inline BornCheck check_born(const ExperimentSpec& spec,
                            const TrajectoryEnsemble& ens) {
  detail::require_matching_ensemble(spec, ens);
  BornCheck out;
  if (ens.trajectories.empty()) return out;
  ExactPropagation exact = propagate_exact(spec);
  for (int t = 0; t < spec.stage_count(); ++t) {
    const std::int64_t n = ens.alive[static_cast<std::size_t>(t)];
    if (n == 0) continue;
    const Distribution& born = exact.stages[static_cast<std::size_t>(t)].born;
    const ConfigSpace& space = spec.spaces[static_cast<std::size_t>(t)];

    BornStageEvidence ev;
    ev.stage = t;
    int live_labels = 0;
    for (int i = 0; i < space.dim(); ++i) {
      std::int64_t obs =
          ens.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      double p = born.p[static_cast<std::size_t>(i)];
      ev.labels.push_back({space.labels[static_cast<std::size_t>(i)], obs, p});
      if (p < 1e-15) {
        if (obs > 0)
          ev.zero_occupied.push_back(
              {space.labels[static_cast<std::size_t>(i)], obs, p});
      } else {
        ++live_labels;
        double e = static_cast<double>(n) * p;
        double d = static_cast<double>(obs) - e;
        ev.statistic += d * d / e;
      }
    }
    ev.dof = live_labels - 1;
    ev.threshold = ev.dof > 0 ? chi_square_quantile_9999(ev.dof) : 0.0;
    out.stages_checked.push_back(t);
    bool bad = !ev.zero_occupied.empty() ||
               (ev.dof > 0 && ev.statistic > ev.threshold);
    if (bad && !out.failure) out.failure = std::move(ev);
  }
  if (out.stages_checked.empty()) return out;
  out.verdict = out.failure ? Verdict::violated : Verdict::holds;
  return out;
}

// Where the wave is real and the wave dynamics conserves its source
// registers, the particle policy must conserve them too.
inline StationarityCheck check_stationarity(const ExperimentSpec& spec) {
  validate_spec(spec);
  StationarityCheck out;
  ExactPropagation exact = propagate_exact(spec);
  for (int k = 0; k < spec.step_count(); ++k) {
    const StepOperator& step = spec.steps[static_cast<std::size_t>(k)];
    if (step.kind == StepKind::filter) continue;
    const WaveFunction& wave =
        exact.stages[static_cast<std::size_t>(k)].wave;
    if (!is_real_wave(wave)) continue;
    if (!detail::step_conserves_registers(step)) continue;

    TransferMatrix transfer;
    if (spec.policy == TransferPolicy::tabulated &&
        spec.tables.count(k) > 0) {
      transfer = spec.tables.at(k);
    } else {
      transfer = transfer_from_flow(flow_matrix(step, wave));
    }
    out.steps_checked.push_back(k);
    for (int j = 0; j < step.from.dim() && !out.step; ++j)
      for (int i = 0; i < step.to.dim() && !out.step; ++i) {
        double mass = transfer.p[static_cast<std::size_t>(i)]
                                [static_cast<std::size_t>(j)];
        if (mass > kTol &&
            !detail::factor_prefix(
                step.from.labels[static_cast<std::size_t>(j)],
                step.to.labels[static_cast<std::size_t>(i)])) {
          out.step = k;
          out.column = step.from.labels[static_cast<std::size_t>(j)];
          out.target = step.to.labels[static_cast<std::size_t>(i)];
          out.mass = mass;
        }
      }
  }
  if (out.steps_checked.empty() && !out.step) return out;
  out.verdict = out.step ? Verdict::violated : Verdict::holds;
  return out;
}

// Counts sampled transitions that leave the support masks.
inline LocalityCheck check_locality(const ExperimentSpec& spec,
                                    const TrajectoryEnsemble& ens) {
  detail::require_matching_ensemble(spec, ens);
  LocalityCheck out;
  if (spec.masks.empty() || ens.trajectories.empty()) return out;
  std::map<std::tuple<int, std::string, std::string>, std::int64_t> bad;
  for (const auto& [k, mask] : spec.masks) {
    out.steps_checked.push_back(k);
    for (const Trajectory& traj : ens.trajectories) {
      if (static_cast<int>(traj.labels.size()) < k + 2) continue;
      const std::string& from = traj.labels[static_cast<std::size_t>(k)];
      const std::string& to = traj.labels[static_cast<std::size_t>(k) + 1];
      ++out.transitions;
      if (!mask.allows(to, from)) {
        ++out.violations;
        ++bad[{k, from, to}];
      }
    }
  }
  for (const auto& [key, count] : bad)
    out.offending.push_back(
        {std::get<0>(key), std::get<1>(key), std::get<2>(key), count});
  if (out.transitions == 0) return out;
  out.verdict = out.violations > 0 ? Verdict::violated : Verdict::holds;
  return out;
}

// Transportation feasibility of every masked step against the exact Born
// marginals (postselected where a filter applies). The first infeasible
// step's cut certificate is the formal incompatibility witness.
inline CertificateCheck incompatibility_certificate(
    const ExperimentSpec& spec) {
  validate_spec(spec);
  CertificateCheck out;
  if (spec.masks.empty()) return out;
  out.applicable = true;
  ExactPropagation exact = propagate_exact(spec);
  for (const auto& [k, mask] : spec.masks) {
    const Distribution& rho_in =
        exact.stages[static_cast<std::size_t>(k)].born;
    const Distribution& rho_out =
        exact.stages[static_cast<std::size_t>(k) + 1].born;
    FeasibilityResult res = feasibility_check(rho_in, rho_out, mask);
    if (!res.feasible) {
      out.feasible = false;
      out.step = k;
      out.certificate = res.certificate;
      return out;
    }
  }
  return out;
}

inline AuditReport run_audit(const ExperimentSpec& spec,
                             const TrajectoryEnsemble& ens) {
  AuditReport report;
  report.wave_autonomy = Verdict::holds;
  report.wave_autonomy_note =
      "wave evolution has no read access to particle labels; holds by "
      "architecture";
  report.born = check_born(spec, ens);
  report.stationarity = check_stationarity(spec);
  report.locality = check_locality(spec, ens);
  report.certificate = incompatibility_certificate(spec);

  bool violated = report.born.verdict == Verdict::violated ||
                  report.stationarity.verdict == Verdict::violated ||
                  report.locality.verdict == Verdict::violated ||
                  (report.certificate.applicable && !report.certificate.feasible);
  report.consistent = !violated;
  if (report.certificate.applicable && !report.certificate.feasible) {
    const CutCertificate& c = *report.certificate.certificate;
    report.conclusion =
        "incompatible: step " + std::to_string(*report.certificate.step) +
        " needs " + detail::short_number(c.required_mass) +
        " on the cut but only " + detail::short_number(c.reachable_mass) +
        " can reach it";
  } else if (!report.consistent) {
    report.conclusion = "principle violations observed; see evidence";
  } else {
    report.conclusion = "all audited principles hold on this run";
  }
  return report;
}

}  // namespace pwl
