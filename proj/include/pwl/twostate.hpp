// Two-state-vector machinery: backward-evolved costates, intermediate
// outcome probabilities fixed by both boundary conditions, weak values,
// and the symmetric forward+backward guidance wave.
#pragma once

#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pwl/core.hpp"
#include "pwl/ensemble.hpp"

namespace pwl {

struct TwoStateVector {
  int stage = 0;
  WaveFunction forward;
  WaveFunction backward;
  complex overlap{0, 0};  // <backward|forward>
};

inline TwoStateVector make_two_state(int stage, WaveFunction forward,
                                     WaveFunction backward) {
  if (!(forward.space == backward.space))
    throw std::invalid_argument(
        "forward and backward states live on different spaces");
  complex overlap{0, 0};
  for (int i = 0; i < forward.space.dim(); ++i)
    overlap += std::conj(backward.amp[i]) * forward.amp[i];
  return TwoStateVector{stage, std::move(forward), std::move(backward),
                        overlap};
}

// Costate at each stage, running the adjoint of every step from the final
// space back to the first. Norms are preserved by unitaries and may
// shrink through an isometry adjoint.
inline std::vector<WaveFunction> backward_evolve(const WaveFunction& post_state,
                                                 const ExperimentSpec& spec) {
  validate_spec(spec);
  if (!(post_state.space == spec.spaces.back()))
    throw std::invalid_argument("postselected state is not on the final stage");
  for (const auto& step : spec.steps)
    if (step.kind == StepKind::filter)
      throw std::invalid_argument(
          "two-state interval contains a filter step; evolve between "
          "measurements only");
  for (const auto& kv : spec.keep_filters)
    if (kv.first != spec.stage_count() - 1)
      throw std::invalid_argument(
          "two-state interval contains a keep filter at stage " +
          std::to_string(kv.first) + "; evolve between measurements only");
  std::vector<WaveFunction> costates(spec.spaces.size());
  costates.back() = post_state;
  for (int k = spec.step_count() - 1; k >= 0; --k) {
    const StepOperator& step = spec.steps[k];
    WaveFunction prev;
    prev.space = spec.spaces[k];
    prev.amp.assign(static_cast<std::size_t>(step.from.dim()), complex{0, 0});
    const WaveFunction& next = costates[static_cast<std::size_t>(k) + 1];
    for (int j = 0; j < step.from.dim(); ++j)
      for (int i = 0; i < step.to.dim(); ++i)
        prev.amp[static_cast<std::size_t>(j)] +=
            std::conj(step.m[static_cast<std::size_t>(i)]
                            [static_cast<std::size_t>(j)]) *
            next.amp[static_cast<std::size_t>(i)];
    costates[static_cast<std::size_t>(k)] = std::move(prev);
  }
  return costates;
}

// Forward state and backward costate paired up at every stage.
inline std::vector<TwoStateVector> two_state_sequence(
    const ExperimentSpec& spec, const WaveFunction& post_state) {
  std::vector<WaveFunction> costates = backward_evolve(post_state, spec);
  std::vector<TwoStateVector> out;
  WaveFunction forward = spec.initial;
  out.push_back(make_two_state(0, forward, costates[0]));
  for (int k = 0; k < spec.step_count(); ++k) {
    forward = apply_step(spec.steps[k], forward);
    out.push_back(make_two_state(
        k + 1, forward, costates[static_cast<std::size_t>(k) + 1]));
  }
  return out;
}

// Named, disjoint label groups that together cover the space.
using ProjectorFamily = std::vector<std::pair<std::string, std::vector<std::string>>>;

inline std::vector<std::vector<complex>> projector_matrix(
    const ConfigSpace& space, const std::vector<std::string>& labels) {
  std::vector<std::vector<complex>> m(
      static_cast<std::size_t>(space.dim()),
      std::vector<complex>(static_cast<std::size_t>(space.dim()),
                           complex{0, 0}));
  for (const auto& label : labels) {
    int i = space.index_of(label);
    if (i < 0)
      throw std::invalid_argument("projector on unknown label '" + label + "'");
    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  }
  return m;
}

namespace detail {

inline void check_family(const ConfigSpace& space,
                         const ProjectorFamily& family) {
  if (family.empty()) throw std::invalid_argument("empty projector family");
  std::set<std::string> seen;
  for (const auto& [name, labels] : family)
    for (const auto& label : labels) {
      if (space.index_of(label) < 0)
        throw std::invalid_argument("projector family names unknown label '" +
                                    label + "'");
      if (!seen.insert(label).second)
        throw std::invalid_argument("projector family overlaps on label '" +
                                    label + "'");
    }
  if (static_cast<int>(seen.size()) != space.dim())
    throw std::invalid_argument(
        "projector family does not cover the space (not a complete family)");
}

}  // namespace detail

// Intermediate-outcome probabilities with both boundary conditions held
// fixed: Pr(k) proportional to |<backward|P_k|forward>|^2.
inline Distribution abl_probability(const TwoStateVector& tsv,
                                    const ProjectorFamily& family) {
  detail::check_family(tsv.forward.space, family);
  std::vector<std::string> names;
  std::vector<double> weight;
  double total = 0;
  for (const auto& [name, labels] : family) {
    complex chain{0, 0};
    for (const auto& label : labels) {
      int i = tsv.forward.space.index_of(label);
      chain += std::conj(tsv.backward.amp[static_cast<std::size_t>(i)]) *
               tsv.forward.amp[static_cast<std::size_t>(i)];
    }
    names.push_back(name);
    weight.push_back(std::norm(chain));
    total += std::norm(chain);
  }
  if (total <= 0)
    throw std::invalid_argument(
        "all chain amplitudes are zero; the boundary conditions admit no "
        "outcome");
  Distribution d;
  d.space = make_space(tsv.stage, names, true);
  d.p.resize(weight.size());
  for (std::size_t i = 0; i < weight.size(); ++i) d.p[i] = weight[i] / total;
  return d;
}

inline complex weak_value(const TwoStateVector& tsv,
                          const std::vector<std::vector<complex>>& op) {
  int n = tsv.forward.space.dim();
  if (static_cast<int>(op.size()) != n)
    throw std::invalid_argument("operator has wrong dimension");
  for (const auto& row : op)
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("operator has wrong dimension");
  if (std::abs(tsv.overlap) <= 1e-12)
    throw std::invalid_argument(
        "undefined weak value: the boundary conditions are orthogonal");
  complex num{0, 0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      num += std::conj(tsv.backward.amp[static_cast<std::size_t>(i)]) *
             op[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
             tsv.forward.amp[static_cast<std::size_t>(j)];
  return num / tsv.overlap;
}

// The guidance wave built from both boundary conditions: the backward
// component is rotated so the pair interferes with the relative phase the
// boundary conditions fix (unit phase of the overlap; 1 when orthogonal),
// then added with the given weight and renormalized.
inline WaveFunction combined_guidance_wave(const TwoStateVector& tsv,
                                           double backward_weight = 1.0) {
  complex phase{1, 0};
  if (std::abs(tsv.overlap) > 1e-12) phase = tsv.overlap / std::abs(tsv.overlap);
  WaveFunction combined;
  combined.space = tsv.forward.space;
  combined.amp.resize(tsv.forward.amp.size());
  double norm2 = 0;
  for (std::size_t i = 0; i < combined.amp.size(); ++i) {
    combined.amp[i] =
        tsv.forward.amp[i] + backward_weight * phase * tsv.backward.amp[i];
    norm2 += std::norm(combined.amp[i]);
  }
  if (norm2 < kTol)
    throw std::invalid_argument(
        "combined guidance wave vanishes; the boundary conditions cancel");
  double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : combined.amp) a *= scale;
  return combined;
}

}  // namespace pwl
