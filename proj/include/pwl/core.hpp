#pragma once

// Configuration spaces, wave functions and step operators for coarse-grained
// pilot-wave dynamics.  A configuration space is a finite ordered label set
// attached to a time stage; dynamics connect consecutive stages through
// unitary, isometric (dimension-growing) or filtering (norm-reducing) steps.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pwl {

using complex = std::complex<double>;

inline constexpr double kTol = 1e-12;

// Separator used in product-space labels ("x⊗y").
inline constexpr const char* kTensorSep = "\xE2\x8A\x97";

inline std::vector<std::string> split_factors(const std::string& label) {
  std::vector<std::string> parts;
  const std::string sep = kTensorSep;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = label.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(label.substr(pos));
      return parts;
    }
    parts.push_back(label.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

inline std::string join_factors(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += kTensorSep;
    out += parts[i];
  }
  return out;
}

struct ConfigSpace {
  int stage = 0;
  std::vector<std::string> labels;  // canonical order

  int index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<int>(i);
    return -1;
  }
  int dim() const { return static_cast<int>(labels.size()); }
  bool operator==(const ConfigSpace&) const = default;
};

// Labels are kept in lexicographic order unless the caller declares an
// explicit ordering.
inline ConfigSpace make_space(int stage, std::vector<std::string> labels,
                              bool declared_order = false) {
  if (stage < 0) throw std::invalid_argument("stage must be non-negative");
  if (labels.empty())
    throw std::invalid_argument("configuration space needs at least one label");
  for (const auto& l : labels)
    if (l.empty()) throw std::invalid_argument("empty label");
  if (!declared_order) std::sort(labels.begin(), labels.end());
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1])
      throw std::invalid_argument("duplicate label '" + labels[i] + "'");
  return ConfigSpace{stage, std::move(labels)};
}

struct WaveFunction {
  ConfigSpace space;
  std::vector<complex> amp;  // aligned with space.labels

  double norm2() const {
    double s = 0;
    for (const auto& a : amp) s += std::norm(a);
    return s;
  }
  complex at(const std::string& label) const {
    int i = space.index_of(label);
    if (i < 0) throw std::invalid_argument("unknown label '" + label + "'");
    return amp[static_cast<std::size_t>(i)];
  }
};

struct Distribution {
  ConfigSpace space;
  std::vector<double> p;

  double total() const {
    double s = 0;
    for (double v : p) s += v;
    return s;
  }
  double at(const std::string& label) const {
    int i = space.index_of(label);
    if (i < 0) throw std::invalid_argument("unknown label '" + label + "'");
    return p[static_cast<std::size_t>(i)];
  }
};

// Missing labels get amplitude zero; the result is normalized.
inline WaveFunction make_wavefunction(
    const ConfigSpace& space,
    const std::vector<std::pair<std::string, complex>>& amplitudes) {
  std::vector<complex> amp(space.dim(), complex{0, 0});
  for (const auto& [label, a] : amplitudes) {
    int i = space.index_of(label);
    if (i < 0)
      throw std::invalid_argument("amplitude on unknown label '" + label + "'");
    amp[static_cast<std::size_t>(i)] += a;
  }
  double n2 = 0;
  for (const auto& a : amp) n2 += std::norm(a);
  if (n2 < kTol) throw std::invalid_argument("zero-norm wave function");
  double scale = 1.0 / std::sqrt(n2);
  for (auto& a : amp) a *= scale;
  return WaveFunction{space, std::move(amp)};
}

enum class StepKind { unitary, isometry, filter };

inline const char* step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::unitary: return "unitary";
    case StepKind::isometry: return "isometry";
    case StepKind::filter: return "filter";
  }
  return "?";
}

// Matrix rows run over the target space, columns over the source space.
// Filters come in two forms: a keep-subset (0/1 diagonal on one space, used
// for within-stage postselection) and a costate contraction that pairs the
// first tensor factor of the source labels against a fixed costate and drops
// it, shrinking the space.
struct StepOperator {
  StepKind kind = StepKind::unitary;
  ConfigSpace from, to;
  std::vector<std::vector<complex>> m;  // to.dim() x from.dim()

  // keep-filter payload
  std::vector<std::string> keep;
  // costate-filter payload: factor-0 value -> costate amplitude
  std::vector<std::pair<std::string, complex>> costate;

  bool is_keep_filter() const {
    return kind == StepKind::filter && !keep.empty();
  }
  bool is_costate_filter() const {
    return kind == StepKind::filter && !costate.empty();
  }
  complex entry(const std::string& out, const std::string& in) const {
    int i = to.index_of(out), j = from.index_of(in);
    if (i < 0 || j < 0) throw std::invalid_argument("entry label not in step");
    return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Columns of a unitary or isometry must be orthonormal.
inline void check_isometry_columns(const StepOperator& s) {
  std::size_t rows = s.to.dim(), cols = s.from.dim();
  for (std::size_t j = 0; j < cols; ++j) {
    double n2 = 0;
    for (std::size_t i = 0; i < rows; ++i) n2 += std::norm(s.m[i][j]);
    if (std::abs(n2 - 1.0) > 1e-9)
      throw std::invalid_argument("step not an isometry (column norm " +
                                  format_double(n2) + ")");
    for (std::size_t k = j + 1; k < cols; ++k) {
      complex dot{0, 0};
      for (std::size_t i = 0; i < rows; ++i)
        dot += std::conj(s.m[i][j]) * s.m[i][k];
      if (std::abs(dot) > 1e-9)
        throw std::invalid_argument("step not an isometry (columns '" +
                                    s.from.labels[j] + "' and '" +
                                    s.from.labels[k] + "' not orthogonal)");
    }
  }
}

}  // namespace detail

inline StepOperator make_step(StepKind kind, ConfigSpace from, ConfigSpace to,
                              std::vector<std::vector<complex>> matrix) {
  if (kind == StepKind::filter)
    throw std::invalid_argument(
        "filters are built with make_keep_filter or make_costate_filter");
  if (to.stage != from.stage + 1)
    throw std::invalid_argument("step must connect consecutive stages");
  if (static_cast<int>(matrix.size()) != to.dim())
    throw std::invalid_argument("step matrix has wrong row count");
  for (const auto& row : matrix)
    if (static_cast<int>(row.size()) != from.dim())
      throw std::invalid_argument("step matrix has wrong column count");
  StepOperator s{kind, std::move(from), std::move(to), std::move(matrix), {}, {}};
  if (kind == StepKind::unitary && s.to.dim() != s.from.dim())
    throw std::invalid_argument("unitary step must be square");
  if (s.to.dim() < s.from.dim())
    throw std::invalid_argument("step reduces dimension (use a filter)");
  detail::check_isometry_columns(s);
  return s;
}

// Convenience: columns given as in-label -> list of (amplitude, out-label).
using ColumnSpec = std::vector<
    std::pair<std::string, std::vector<std::pair<complex, std::string>>>>;

inline StepOperator make_step_from_columns(StepKind kind,
                                           const ConfigSpace& from,
                                           const ConfigSpace& to,
                                           const ColumnSpec& columns) {
  std::vector<std::vector<complex>> matrix(
      to.dim(), std::vector<complex>(from.dim(), complex{0, 0}));
  std::set<std::string> seen;
  for (const auto& [in, terms] : columns) {
    int j = from.index_of(in);
    if (j < 0)
      throw std::invalid_argument("step column for unknown label '" + in + "'");
    if (!seen.insert(in).second)
      throw std::invalid_argument("duplicate step column '" + in + "'");
    for (const auto& [a, out] : terms) {
      int i = to.index_of(out);
      if (i < 0)
        throw std::invalid_argument("step maps to unknown label '" + out + "'");
      matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += a;
    }
  }
  if (static_cast<int>(seen.size()) != from.dim())
    throw std::invalid_argument("step is missing columns");
  return make_step(kind, from, to, std::move(matrix));
}

// Within-stage postselection: identity on the kept labels, zero elsewhere.
inline StepOperator make_keep_filter(const ConfigSpace& space,
                                     std::vector<std::string> keep) {
  if (keep.empty()) throw std::invalid_argument("empty keep-filter");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  std::vector<std::vector<complex>> matrix(
      space.dim(), std::vector<complex>(space.dim(), complex{0, 0}));
  for (const auto& label : keep) {
    int i = space.index_of(label);
    if (i < 0)
      throw std::invalid_argument("keep-filter on unknown label '" + label +
                                  "'");
    matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  }
  StepOperator s{StepKind::filter, space,       space,
                 std::move(matrix), std::move(keep), {}};
  return s;
}

// Costate contraction: source labels must read "x⊗rest" with rest a target
// label; the step applies sum_x conj(costate_x) <x| to the first factor.
// The costate must be normalized, which bounds every per-label transport
// weight by the label's own mass (Cauchy-Schwarz).
inline StepOperator make_costate_filter(
    const ConfigSpace& from, const ConfigSpace& to,
    std::vector<std::pair<std::string, complex>> costate) {
  if (to.stage != from.stage + 1)
    throw std::invalid_argument("step must connect consecutive stages");
  if (costate.empty()) throw std::invalid_argument("empty costate");
  std::sort(costate.begin(), costate.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < costate.size(); ++i)
    if (costate[i].first == costate[i - 1].first)
      throw std::invalid_argument("duplicate costate label '" +
                                  costate[i].first + "'");
  double n2 = 0;
  for (const auto& [label, a] : costate) n2 += std::norm(a);
  if (std::abs(n2 - 1.0) > 1e-9)
    throw std::invalid_argument("costate not normalized (norm " +
                                detail::format_double(n2) + ")");
  std::vector<std::vector<complex>> matrix(
      to.dim(), std::vector<complex>(from.dim(), complex{0, 0}));
  for (int j = 0; j < from.dim(); ++j) {
    auto parts = split_factors(from.labels[j]);
    if (parts.size() < 2)
      throw std::invalid_argument("costate filter needs product labels, got '" +
                                  from.labels[j] + "'");
    std::string head = parts.front();
    parts.erase(parts.begin());
    std::string rest = join_factors(parts);
    int i = to.index_of(rest);
    if (i < 0)
      throw std::invalid_argument("costate filter: source label '" +
                                  from.labels[j] +
                                  "' does not contract onto the target space");
    for (const auto& [label, a] : costate)
      if (label == head)
        matrix[static_cast<std::size_t>(i)][j] = std::conj(a);
  }
  StepOperator s{StepKind::filter, from, to, std::move(matrix), {},
                 std::move(costate)};
  return s;
}

inline WaveFunction apply_step(const StepOperator& step,
                               const WaveFunction& psi) {
  if (!(psi.space == step.from))
    throw std::invalid_argument("wave function space does not match step");
  std::vector<complex> out(step.to.dim(), complex{0, 0});
  for (int i = 0; i < step.to.dim(); ++i)
    for (int j = 0; j < step.from.dim(); ++j)
      out[i] += step.m[i][j] * psi.amp[j];
  WaveFunction result{step.to, std::move(out)};
  if (step.kind != StepKind::filter &&
      std::abs(result.norm2() - psi.norm2()) > 1e-9)
    throw std::logic_error("step failed to preserve the norm");
  return result;
}

// Product wave function; labels combine as "x⊗y" and the product space is
// re-sorted into canonical order.
inline WaveFunction tensor(const WaveFunction& x, const WaveFunction& y) {
  if (x.space.stage != y.space.stage)
    throw std::invalid_argument("tensor factors live at different stages");
  std::vector<std::string> labels;
  labels.reserve(x.space.dim() * y.space.dim());
  for (const auto& a : x.space.labels)
    for (const auto& b : y.space.labels)
      labels.push_back(a + kTensorSep + b);
  ConfigSpace space = make_space(x.space.stage, labels);
  std::vector<complex> amp(space.dim(), complex{0, 0});
  for (int i = 0; i < x.space.dim(); ++i)
    for (int j = 0; j < y.space.dim(); ++j) {
      const std::string label =
          x.space.labels[i] + kTensorSep + y.space.labels[j];
      amp[static_cast<std::size_t>(space.index_of(label))] =
          x.amp[i] * y.amp[j];
    }
  return WaveFunction{std::move(space), std::move(amp)};
}

struct Projection {
  double survival = 0;
  std::optional<WaveFunction> conditional;  // empty when survival is zero
};

inline Projection project(const StepOperator& filter, const WaveFunction& psi) {
  if (filter.kind != StepKind::filter)
    throw std::invalid_argument("project expects a filter step");
  if (!(psi.space == filter.from))
    throw std::invalid_argument("wave function space does not match filter");
  std::vector<complex> out(filter.to.dim(), complex{0, 0});
  for (int i = 0; i < filter.to.dim(); ++i)
    for (int j = 0; j < filter.from.dim(); ++j)
      out[i] += filter.m[i][j] * psi.amp[j];
  double survival = 0;
  for (const auto& a : out) survival += std::norm(a);
  if (survival < kTol) return Projection{0.0, std::nullopt};
  double scale = 1.0 / std::sqrt(survival);
  for (auto& a : out) a *= scale;
  return Projection{survival, WaveFunction{filter.to, std::move(out)}};
}

// True when one global phase makes every amplitude real (within tolerance).
inline bool is_real_wave(const WaveFunction& psi) {
  double best = 0;
  complex phase{1, 0};
  for (const auto& a : psi.amp) {
    double m = std::abs(a);
    if (m > best) {
      best = m;
      phase = a / m;
    }
  }
  if (best == 0) return true;
  for (const auto& a : psi.amp)
    if (std::abs(std::imag(a * std::conj(phase))) > kTol) return false;
  return true;
}

}  // namespace pwl
