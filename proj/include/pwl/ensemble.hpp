// Exact distribution propagation and seeded Monte Carlo sampling over an
// experiment, with postselection conditioning.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pwl/core.hpp"
#include "pwl/guidance.hpp"
#include "pwl/rng.hpp"

namespace pwl {

enum class TransferPolicy { flow_derived, tabulated };

inline const char* transfer_policy_name(TransferPolicy p) {
  return p == TransferPolicy::flow_derived ? "flow" : "table";
}

// A full experiment: stage spaces, the steps between them, optional
// within-stage keep filters, optional per-step locality masks (audit
// input, not dynamics), and the particle transfer policy. Tables are
// column-stochastic except on filter steps, where a column may sum to
// less than one: the deficit is the per-label death probability.
struct ExperimentSpec {
  std::string name;
  std::vector<ConfigSpace> spaces;
  std::vector<StepOperator> steps;           // steps[k]: spaces[k] -> spaces[k+1]
  std::map<int, StepOperator> keep_filters;  // stage -> within-stage filter
  std::map<int, SupportMask> masks;          // step index -> mask
  std::map<int, TransferMatrix> tables;      // step index -> tabulated transfer
  WaveFunction initial;
  TransferPolicy policy = TransferPolicy::flow_derived;

  int stage_count() const { return static_cast<int>(spaces.size()); }
  int step_count() const { return static_cast<int>(steps.size()); }
};

struct Trajectory {
  std::vector<std::string> labels;  // one per reached stage
  bool survived = true;
  int alive_through = 0;  // last stage at which the run had passed all filters
  std::uint64_t run_index = 0;
};

struct TrajectoryEnsemble {
  std::string spec_name;
  std::uint64_t seed = 0;
  std::vector<ConfigSpace> spaces;
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<std::int64_t>> counts;  // [stage][label], alive runs
  std::vector<std::int64_t> alive;                // per stage
};

struct StageExact {
  WaveFunction wave;       // conditional wave at this stage (after any filter)
  Distribution born;
  Distribution particle;   // policy-transported particle distribution
  double wave_survival = 1.0;      // cumulative Born survival probability
  double particle_survival = 1.0;  // cumulative survival under the policy
  std::optional<WaveFunction> pre_filter_wave;
};

namespace detail {

struct CostatePlan {
  double survival = 0.0;  // uniform per-run survival probability
  int head_factors = 0;   // leading factors the filter contracts away
  int preserve_factors = 0;
  // Per preserved-prefix cumulative distribution over target label indices.
  std::map<std::string, std::vector<std::pair<double, int>>> resample_cdf;
};

}  // namespace detail

// propagate_exact output plus the per-step sampling machinery it implies.
struct ExactPropagation {
  std::vector<StageExact> stages;
  std::vector<std::optional<TransferMatrix>> transfers;   // per step
  std::map<int, detail::CostatePlan> costate_plans;       // flow-policy filters
};

inline void validate_spec(const ExperimentSpec& spec) {
  if (spec.spaces.empty()) throw std::invalid_argument("experiment has no stages");
  if (spec.step_count() != spec.stage_count() - 1)
    throw std::invalid_argument("experiment needs one step per stage gap");
  for (int k = 0; k < spec.step_count(); ++k) {
    if (!(spec.steps[k].from == spec.spaces[k]) ||
        !(spec.steps[k].to == spec.spaces[k + 1]))
      throw std::invalid_argument("step endpoints do not chain at step " +
                                  std::to_string(k));
  }
  if (!(spec.initial.space == spec.spaces.front()))
    throw std::invalid_argument("initial state is not on the first stage");
  for (const auto& [stage, filter] : spec.keep_filters) {
    if (stage < 0 || stage >= spec.stage_count())
      throw std::invalid_argument("keep filter on unknown stage");
    if (!filter.is_keep_filter())
      throw std::invalid_argument("stage filter must be a keep filter");
    if (!(filter.from == spec.spaces[stage]))
      throw std::invalid_argument("keep filter space mismatch at stage " +
                                  std::to_string(stage));
  }
  for (const auto& [k, mask] : spec.masks) {
    if (k < 0 || k >= spec.step_count())
      throw std::invalid_argument("mask on unknown step");
    if (!(mask.from == spec.spaces[k]) || !(mask.to == spec.spaces[k + 1]))
      throw std::invalid_argument("mask space mismatch at step " +
                                  std::to_string(k));
  }
  for (const auto& [k, table] : spec.tables) {
    if (k < 0 || k >= spec.step_count())
      throw std::invalid_argument("table on unknown step");
    if (!(table.from == spec.spaces[k]) || !(table.to == spec.spaces[k + 1]))
      throw std::invalid_argument("table space mismatch at step " +
                                  std::to_string(k));
    bool is_filter = spec.steps[k].kind == StepKind::filter;
    for (int j = 0; j < table.from.dim(); ++j) {
      double col = 0;
      for (int i = 0; i < table.to.dim(); ++i) {
        if (table.p[i][j] < -1e-12)
          throw std::invalid_argument("negative table entry at step " +
                                      std::to_string(k));
        col += table.p[i][j];
      }
      if (col > 1.0 + 1e-9 || (!is_filter && col < 1.0 - 1e-9))
        throw std::invalid_argument(
            "table column '" + table.from.labels[j] + "' at step " +
            std::to_string(k) +
            (is_filter ? " exceeds unit mass" : " is not stochastic"));
    }
  }
  if (spec.policy == TransferPolicy::tabulated) {
    for (int k = 0; k < spec.step_count(); ++k)
      if (spec.steps[k].kind != StepKind::filter && !spec.tables.count(k))
        throw std::invalid_argument("tabulated policy is missing a table for step " +
                                    std::to_string(k));
  }
}

namespace detail {

inline Distribution distribution_on(const ConfigSpace& space,
                                    std::vector<double> p) {
  Distribution d;
  d.space = space;
  d.p = std::move(p);
  return d;
}

inline std::string factor_prefix(const std::string& label, int count) {
  auto parts = split_factors(label);
  std::vector<std::string> head(parts.begin(), parts.begin() + count);
  return join_factors(head);
}

// Decide how a flow-guided particle crosses a costate filter. Survival is
// uniform (the outcome statistics belong to the wave, which is the same
// in every run), so the survivors carry the source distribution of tails.
// The survivor keeps the longest leading block of its tail factors whose
// source marginal already matches the conditional wave's marginal, and
// redraws the remaining factors from the conditional.
inline CostatePlan make_costate_plan(const StepOperator& filter,
                                     double survival,
                                     const Distribution& source_particle,
                                     const Distribution& target_born) {
  CostatePlan plan;
  plan.survival = survival;
  int tail_factors =
      static_cast<int>(split_factors(filter.to.labels.front()).size());
  plan.head_factors =
      static_cast<int>(split_factors(filter.from.labels.front()).size()) -
      tail_factors;

  auto tail_of = [&](const std::string& label) {
    auto parts = split_factors(label);
    std::vector<std::string> tail(parts.begin() + plan.head_factors,
                                  parts.end());
    return join_factors(tail);
  };

  // Source tail distribution among survivors.
  std::map<std::string, double> source_tail;
  for (int j = 0; j < filter.from.dim(); ++j)
    if (source_particle.p[j] > 0)
      source_tail[tail_of(filter.from.labels[j])] += source_particle.p[j];

  for (int len = tail_factors; len >= 0; --len) {
    std::map<std::string, double> src, dst;
    for (const auto& [tail, w] : source_tail)
      src[factor_prefix(tail, len)] += w;
    for (int i = 0; i < filter.to.dim(); ++i)
      if (target_born.p[i] > 0)
        dst[factor_prefix(filter.to.labels[i], len)] += target_born.p[i];
    bool match = src.size() == dst.size();
    if (match)
      for (const auto& [prefix, w] : src) {
        auto it = dst.find(prefix);
        if (it == dst.end() || std::fabs(it->second - w) > 1e-12) {
          match = false;
          break;
        }
      }
    if (!match) continue;
    plan.preserve_factors = len;
    for (const auto& [prefix, w] : dst) {
      auto& cdf = plan.resample_cdf[prefix];
      double cum = 0;
      for (int i = 0; i < filter.to.dim(); ++i) {
        if (target_born.p[i] <= 0) continue;
        if (factor_prefix(filter.to.labels[i], len) != prefix) continue;
        cum += target_born.p[i] / w;
        cdf.push_back({cum, i});
      }
      if (!cdf.empty()) cdf.back().first = 1.0;
    }
    return plan;
  }
  return plan;  // unreachable: len == 0 always matches
}

inline int draw_from_cdf(const std::vector<std::pair<double, int>>& cdf,
                         double u) {
  for (const auto& [cum, idx] : cdf)
    if (u < cum) return idx;
  return cdf.back().second;
}

}  // namespace detail

inline ExactPropagation propagate_exact(const ExperimentSpec& spec) {
  validate_spec(spec);
  ExactPropagation out;
  out.transfers.resize(spec.step_count());

  WaveFunction wave = spec.initial;
  Distribution particle = born_distribution(wave);
  double wave_survival = 1.0, particle_survival = 1.0;
  auto use_table = [&](int k) {
    return spec.policy == TransferPolicy::tabulated && spec.tables.count(k) > 0;
  };

  auto push_stage = [&](int stage) {
    StageExact st;
    st.wave = wave;
    st.born = born_distribution(wave);
    st.particle = particle;
    st.wave_survival = wave_survival;
    st.particle_survival = particle_survival;
    auto it = spec.keep_filters.find(stage);
    if (it != spec.keep_filters.end()) {
      st.pre_filter_wave = wave;
      auto proj = project(it->second, wave);
      wave_survival *= proj.survival;
      if (!proj.conditional.has_value())
        throw std::invalid_argument("keep filter annihilates the wave at stage " +
                                    std::to_string(stage));
      wave = *proj.conditional;
      double kept = 0;
      std::vector<double> masked(particle.p.size(), 0.0);
      const auto& keep = it->second.keep;
      for (int i = 0; i < it->second.from.dim(); ++i)
        if (std::binary_search(keep.begin(), keep.end(),
                               it->second.from.labels[i])) {
          masked[i] = particle.p[i];
          kept += particle.p[i];
        }
      if (kept <= 0)
        throw std::invalid_argument(
            "keep filter annihilates the particle ensemble at stage " +
            std::to_string(stage));
      for (double& w : masked) w /= kept;
      particle_survival *= kept;
      particle = detail::distribution_on(particle.space, std::move(masked));
      st.wave = wave;
      st.born = born_distribution(wave);
      st.particle = particle;
      st.wave_survival = wave_survival;
      st.particle_survival = particle_survival;
    }
    out.stages.push_back(std::move(st));
  };

  push_stage(0);
  for (int k = 0; k < spec.step_count(); ++k) {
    const StepOperator& step = spec.steps[k];
    if (step.kind != StepKind::filter) {
      TransferMatrix t = use_table(k)
                             ? spec.tables.at(k)
                             : transfer_from_flow(flow_matrix(step, wave));
      WaveFunction next_wave = apply_step(step, wave);
      Distribution next_born = born_distribution(next_wave);
      if (use_table(k)) {
        Distribution born_now = born_distribution(wave);
        for (int i = 0; i < step.to.dim(); ++i) {
          double moved = 0;
          for (int j = 0; j < step.from.dim(); ++j)
            moved += t.p[i][j] * born_now.p[j];
          if (std::fabs(moved - next_born.p[i]) > 1e-9)
            throw std::invalid_argument(
                "tabulated transfer violates Born transport at step " +
                std::to_string(k) + " -> " + std::to_string(k + 1));
        }
      }
      std::vector<double> moved(step.to.dim(), 0.0);
      for (int i = 0; i < step.to.dim(); ++i)
        for (int j = 0; j < step.from.dim(); ++j)
          moved[i] += t.p[i][j] * particle.p[j];
      particle = detail::distribution_on(step.to, std::move(moved));
      out.transfers[k] = std::move(t);
      wave = std::move(next_wave);
    } else if (step.is_costate_filter()) {
      auto proj = project(step, wave);
      if (!proj.conditional.has_value())
        throw std::invalid_argument("costate filter annihilates the wave at step " +
                                    std::to_string(k));
      Distribution target_born = born_distribution(*proj.conditional);
      if (use_table(k)) {
        const TransferMatrix& t = spec.tables.at(k);
        std::vector<double> moved(step.to.dim(), 0.0);
        double kept = 0;
        for (int i = 0; i < step.to.dim(); ++i)
          for (int j = 0; j < step.from.dim(); ++j) {
            moved[i] += t.p[i][j] * particle.p[j];
            kept += t.p[i][j] * particle.p[j];
          }
        if (kept <= 0)
          throw std::invalid_argument(
              "filter table annihilates the particle ensemble at step " +
              std::to_string(k));
        for (double& w : moved) w /= kept;
        particle_survival *= kept;
        particle = detail::distribution_on(step.to, std::move(moved));
        out.transfers[k] = t;
      } else {
        auto plan = detail::make_costate_plan(step, proj.survival, particle,
                                              target_born);
        // Survivors keep the preserved prefix; the rest is redrawn from
        // the conditional, so the particle lands on the conditional's
        // per-prefix law weighted by the source prefix marginal.
        std::vector<double> moved(step.to.dim(), 0.0);
        std::map<std::string, double> src_prefix;
        for (int j = 0; j < step.from.dim(); ++j) {
          if (particle.p[j] <= 0) continue;
          auto parts = split_factors(step.from.labels[j]);
          std::vector<std::string> tail(parts.begin() + plan.head_factors,
                                        parts.end());
          src_prefix[detail::factor_prefix(join_factors(tail),
                                           plan.preserve_factors)] +=
              particle.p[j];
        }
        for (const auto& [prefix, w] : src_prefix) {
          const auto& cdf = plan.resample_cdf.at(prefix);
          double prev = 0;
          for (const auto& [cum, idx] : cdf) {
            moved[idx] += w * (cum - prev);
            prev = cum;
          }
        }
        particle_survival *= plan.survival;
        particle = detail::distribution_on(step.to, std::move(moved));
        out.costate_plans[k] = std::move(plan);
      }
      wave_survival *= proj.survival;
      wave = *proj.conditional;
    } else {
      throw std::invalid_argument("keep filters belong to stages, not steps");
    }
    push_stage(k + 1);
  }
  return out;
}

namespace detail {

struct SamplerTables {
  // Per step: per-column CDFs (empty for flow-policy costate steps).
  std::vector<std::vector<std::vector<std::pair<double, int>>>> columns;
  std::vector<double> column_mass;  // flattened survival per (step, column)
  std::vector<std::pair<double, int>> initial_cdf;
};

inline SamplerTables build_sampler(const ExperimentSpec& spec,
                                   const ExactPropagation& prep) {
  SamplerTables st;
  Distribution init = born_distribution(spec.initial);
  double cum = 0;
  for (int i = 0; i < init.space.dim(); ++i) {
    if (init.p[i] <= 0) continue;
    cum += init.p[i];
    st.initial_cdf.push_back({cum, i});
  }
  if (!st.initial_cdf.empty()) st.initial_cdf.back().first = 1.0;

  st.columns.resize(spec.step_count());
  for (int k = 0; k < spec.step_count(); ++k) {
    if (!prep.transfers[k].has_value()) continue;  // flow costate plan
    const TransferMatrix& t = *prep.transfers[k];
    bool is_filter = spec.steps[k].kind == StepKind::filter;
    st.columns[k].resize(t.from.dim());
    for (int j = 0; j < t.from.dim(); ++j) {
      double c = 0;
      for (int i = 0; i < t.to.dim(); ++i) {
        if (t.p[i][j] <= 0) continue;
        c += t.p[i][j];
        st.columns[k][j].push_back({c, i});
      }
      // Columns of a non-filter step sum to one; snap the CDF top so a
      // draw of u -> 1 cannot fall off the end.
      if (!is_filter && !st.columns[k][j].empty())
        st.columns[k][j].back().first = 1.0;
    }
  }
  return st;
}

}  // namespace detail

inline TrajectoryEnsemble sample_trajectories(const ExperimentSpec& spec,
                                              std::uint64_t n,
                                              std::uint64_t seed,
                                              int workers = 1) {
  if (n < 1) throw std::invalid_argument("ensemble needs at least one run");
  ExactPropagation prep = propagate_exact(spec);
  detail::SamplerTables tables = detail::build_sampler(spec, prep);

  TrajectoryEnsemble ens;
  ens.spec_name = spec.name;
  ens.seed = seed;
  ens.spaces = spec.spaces;
  ens.trajectories.resize(n);

  auto run_one = [&](std::uint64_t r) {
    Trajectory traj;
    traj.run_index = r;
    double u0 = counter_uniform(seed, r, 0, 0);
    int label = detail::draw_from_cdf(tables.initial_cdf, u0);
    traj.labels.push_back(spec.spaces[0].labels[label]);
    traj.alive_through = 0;
    auto kept_by = [](const StepOperator& f, const std::string& l) {
      return std::binary_search(f.keep.begin(), f.keep.end(), l);
    };
    auto keep0 = spec.keep_filters.find(0);
    if (keep0 != spec.keep_filters.end() &&
        !kept_by(keep0->second, traj.labels.back())) {
      traj.survived = false;
      traj.alive_through = -1;
      return traj;
    }
    for (int k = 0; k < spec.step_count(); ++k) {
      int stage = k + 1;
      double u = counter_uniform(seed, r, static_cast<std::uint64_t>(stage), 0);
      int next = -1;
      if (prep.transfers[k].has_value()) {
        const auto& cdf = tables.columns[k][label];
        double mass = cdf.empty() ? 0.0 : cdf.back().first;
        if (u >= mass) {  // sub-stochastic column: the run is filtered out
          traj.survived = false;
          return traj;
        }
        next = detail::draw_from_cdf(cdf, u);
      } else {
        const auto& plan = prep.costate_plans.at(k);
        if (u >= plan.survival) {
          traj.survived = false;
          return traj;
        }
        auto parts = split_factors(spec.spaces[k].labels[label]);
        std::vector<std::string> tail(parts.begin() + plan.head_factors,
                                      parts.end());
        std::string prefix = detail::factor_prefix(join_factors(tail),
                                                   plan.preserve_factors);
        double u2 =
            counter_uniform(seed, r, static_cast<std::uint64_t>(stage), 1);
        next = detail::draw_from_cdf(plan.resample_cdf.at(prefix), u2);
      }
      label = next;
      traj.labels.push_back(spec.spaces[stage].labels[label]);
      auto keep = spec.keep_filters.find(stage);
      if (keep != spec.keep_filters.end() &&
          !kept_by(keep->second, traj.labels.back())) {
        traj.survived = false;
        return traj;  // alive_through stays at the previous stage
      }
      traj.alive_through = stage;
    }
    return traj;
  };

  if (workers < 1) workers = 1;
  if (workers == 1) {
    for (std::uint64_t r = 0; r < n; ++r) ens.trajectories[r] = run_one(r);
  } else {
    std::vector<std::thread> pool;
    std::uint64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      std::uint64_t lo = w * chunk, hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (std::uint64_t r = lo; r < hi; ++r)
          ens.trajectories[r] = run_one(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  ens.counts.resize(spec.stage_count());
  ens.alive.assign(spec.stage_count(), 0);
  for (int t = 0; t < spec.stage_count(); ++t)
    ens.counts[t].assign(spec.spaces[t].dim(), 0);
  for (const auto& traj : ens.trajectories)
    for (int t = 0; t <= traj.alive_through; ++t) {
      ++ens.counts[t][spec.spaces[t].index_of(traj.labels[t])];
      ++ens.alive[t];
    }
  return ens;
}

struct Conditioned {
  double fraction = 0.0;
  std::optional<Distribution> distribution;
  TrajectoryEnsemble subset;
};

inline Conditioned condition_on(const TrajectoryEnsemble& ensemble, int stage,
                                const std::vector<std::string>& keep) {
  if (stage < 0 || stage >= static_cast<int>(ensemble.spaces.size()))
    throw std::invalid_argument("condition stage out of range");
  const ConfigSpace& space = ensemble.spaces[stage];
  std::set<std::string> keep_set;
  for (const auto& label : keep) {
    if (space.index_of(label) < 0)
      throw std::invalid_argument("condition label '" + label +
                                  "' not on stage " + std::to_string(stage));
    keep_set.insert(label);
  }
  Conditioned out;
  out.subset.spec_name = ensemble.spec_name;
  out.subset.seed = ensemble.seed;
  out.subset.spaces = ensemble.spaces;
  std::vector<std::int64_t> freq(space.dim(), 0);
  for (const auto& traj : ensemble.trajectories) {
    if (traj.alive_through < stage) continue;
    if (!keep_set.count(traj.labels[stage])) continue;
    ++freq[space.index_of(traj.labels[stage])];
    out.subset.trajectories.push_back(traj);
  }
  std::int64_t kept = static_cast<std::int64_t>(out.subset.trajectories.size());
  if (!ensemble.trajectories.empty())
    out.fraction = static_cast<double>(kept) /
                   static_cast<double>(ensemble.trajectories.size());
  if (kept > 0) {
    std::vector<double> p(space.dim(), 0.0);
    for (int i = 0; i < space.dim(); ++i)
      p[i] = static_cast<double>(freq[i]) / static_cast<double>(kept);
    out.distribution = detail::distribution_on(space, std::move(p));
  }
  int n_stage = static_cast<int>(ensemble.spaces.size());
  out.subset.counts.resize(n_stage);
  out.subset.alive.assign(n_stage, 0);
  for (int t = 0; t < n_stage; ++t)
    out.subset.counts[t].assign(ensemble.spaces[t].dim(), 0);
  for (const auto& traj : out.subset.trajectories)
    for (int t = 0; t <= traj.alive_through; ++t) {
      ++out.subset.counts[t][ensemble.spaces[t].index_of(traj.labels[t])];
      ++out.subset.alive[t];
    }
  return out;
}

}  // namespace pwl
