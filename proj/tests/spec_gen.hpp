// Generators shared by the DSL tests and the acceptance gate: randomized
// valid experiment specs and a text mutator for the parser fuzz corpus.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pwl/dsl.hpp"
#include "pwl/experiments.hpp"
#include "test_util.hpp"

namespace spec_gen {

// Random but valid experiment: shuffled declared label orders, complex
// unitary or isometry steps, optional trailing costate filter, optional
// keep filters, masks, and tables.
inline pwl::ExperimentSpec random_spec(std::uint64_t id) {
  using namespace pwl;
  const std::string SEP = kTensorSep;
  std::mt19937_64 rng(9100 + id);
  auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  auto chance = [&](double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  };

  bool with_costate = chance(0.3);
  int n_stages = pick(2, 4);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f"};

  std::vector<int> dims(n_stages);
  std::vector<std::vector<std::string>> labels(n_stages);
  int nf = 0;
  if (with_costate) {
    nf = pick(2, 3);
    int nr = pick(1, 2);
    dims[n_stages - 1] = nr;
    dims[n_stages - 2] = nf * nr;
    for (int r = 0; r < nr; ++r) labels[n_stages - 1].push_back(pool[r]);
    for (int f = 0; f < nf; ++f)
      for (int r = 0; r < nr; ++r)
        labels[n_stages - 2].push_back("F" + std::to_string(f) + SEP + pool[r]);
    for (int t = n_stages - 3; t >= 0; --t) dims[t] = pick(1, dims[t + 1]);
  } else {
    dims[0] = pick(1, 6);
    for (int t = 1; t < n_stages; ++t) dims[t] = pick(dims[t - 1], 6);
  }
  for (int t = 0; t < n_stages; ++t) {
    if (!labels[t].empty()) continue;
    labels[t] = std::vector<std::string>(pool.begin(), pool.begin() + dims[t]);
  }
  for (auto& ls : labels) std::shuffle(ls.begin(), ls.end(), rng);

  ExperimentSpec spec;
  spec.name = "rand" + std::to_string(id);
  for (int t = 0; t < n_stages; ++t)
    spec.spaces.push_back(make_space(t, labels[t], true));

  int unitary_steps = n_stages - 1 - (with_costate ? 1 : 0);
  for (int k = 0; k < unitary_steps; ++k) {
    auto m = test_util::random_isometry(rng, dims[k + 1], dims[k]);
    StepKind kind =
        dims[k] == dims[k + 1] ? StepKind::unitary : StepKind::isometry;
    spec.steps.push_back(make_step(kind, spec.spaces[k], spec.spaces[k + 1], m));
  }
  if (with_costate) {
    std::vector<std::pair<std::string, complex>> costate;
    std::normal_distribution<double> gauss(0.0, 1.0);
    double n2 = 0;
    for (int f = 0; f < nf; ++f) {
      complex a{gauss(rng), gauss(rng)};
      costate.push_back({"F" + std::to_string(f), a});
      n2 += std::norm(a);
    }
    double scale = 1.0 / std::sqrt(n2);
    for (auto& [l, a] : costate) a *= scale;
    spec.steps.push_back(make_costate_filter(
        spec.spaces[n_stages - 2], spec.spaces[n_stages - 1], costate));
  }

  if (chance(0.3)) {
    int t = pick(0, n_stages - 1);
    std::vector<std::string> keep = spec.spaces[t].labels;
    std::shuffle(keep.begin(), keep.end(), rng);
    keep.resize(static_cast<std::size_t>(pick(1, spec.spaces[t].dim())));
    spec.keep_filters[t] = make_keep_filter(spec.spaces[t], keep);
  }

  for (int k = 0; k < n_stages - 1; ++k) {
    if (!chance(0.4)) continue;
    SupportMask m;
    m.from = spec.spaces[k];
    m.to = spec.spaces[k + 1];
    m.allow.assign(m.to.dim(), std::vector<char>(m.from.dim(), 0));
    for (auto& row : m.allow)
      for (auto& cell : row) cell = chance(0.5) ? 1 : 0;
    spec.masks[k] = m;
  }

  spec.policy = chance(0.4) ? TransferPolicy::tabulated
                            : TransferPolicy::flow_derived;
  for (int k = 0; k < n_stages - 1; ++k) {
    bool is_filter = spec.steps[k].kind == StepKind::filter;
    bool want = spec.policy == TransferPolicy::tabulated ? !is_filter
                                                         : chance(0.3);
    if (is_filter && chance(0.5)) want = true;
    if (!want) continue;
    TransferMatrix t;
    t.from = spec.spaces[k];
    t.to = spec.spaces[k + 1];
    t.p.assign(t.to.dim(), std::vector<double>(t.from.dim(), 0.0));
    t.source_support.assign(t.from.dim(), 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double keep_mass = is_filter ? unit(rng) : 1.0;
    for (int j = 0; j < t.from.dim(); ++j) {
      double sum = 0;
      for (int i = 0; i < t.to.dim(); ++i) {
        t.p[i][j] = unit(rng) + 1e-3;
        sum += t.p[i][j];
      }
      for (int i = 0; i < t.to.dim(); ++i) t.p[i][j] *= keep_mass / sum;
    }
    spec.tables[k] = t;
  }

  spec.initial = test_util::random_wave(rng, spec.spaces[0]);
  validate_spec(spec);
  return spec;
}

inline std::string mutate_text(const std::string& base, std::mt19937_64& rng) {
  std::string s = base;
  auto pick = [&](std::size_t n) { return rng() % n; };
  switch (pick(8)) {
    case 0:
      s = s.substr(0, pick(s.size() + 1));
      break;
    case 1: {
      if (!s.empty()) {
        std::size_t at = pick(s.size());
        s.erase(at, pick(30) + 1);
      }
      break;
    }
    case 2: {
      std::size_t at = pick(s.size() + 1);
      static const char* bits[] = {"{",  "}",   ";;",     "->",  "costate",
                                   "1e999", "-R9", "0/0", "##", "\xff\xc3"};
      s.insert(at, bits[pick(10)]);
      break;
    }
    case 3: {
      if (!s.empty()) s[pick(s.size())] = static_cast<char>(pick(255) + 1);
      break;
    }
    case 4: {
      std::size_t at = pick(s.size() + 1);
      s.insert(at, "\nstage 0 basis { a }\n");
      break;
    }
    case 5: {
      std::string t;
      for (char c : s)
        if (c != '}') t += c;
      s = t;
      break;
    }
    case 6: {
      if (!s.empty()) {
        std::size_t a = pick(s.size()), b = pick(s.size());
        std::swap(s[a], s[b]);
      }
      break;
    }
    case 7: {
      std::size_t at = pick(s.size() + 1);
      s = s.substr(0, at) + s + s.substr(at);
      break;
    }
  }
  return s;
}

}  // namespace spec_gen
