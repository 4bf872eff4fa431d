// Report assembly and serialization for the command-line front end: a
// versioned JSON schema with deterministic bytes, CSV export of
// distributions, and human-readable result tables.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwl/audit.hpp"
#include "pwl/twostate.hpp"
#include "pwl/version.hpp"

namespace pwl {

namespace detail {

// Full-precision text: 17 significant digits round-trip any double.
inline std::string number_text(double v) {
  if (!std::isfinite(v)) throw std::logic_error("non-finite number in report");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Short human form; integral values keep a ".0" so probabilities read as
// fractions, not counts.
inline std::string human_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline std::string human_complex(complex a) {
  if (std::abs(a.imag()) <= 1e-12) return human_number(a.real());
  std::string s = human_number(a.real());
  std::string im = human_number(a.imag());
  if (im[0] != '-') s += "+";
  return s + im + "i";
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace detail

// Streaming JSON writer with insertion-ordered keys, so equal reports
// serialize to identical bytes.
class JsonWriter {
 public:
  void begin_object() { item(); out_ += '{'; fresh_.push_back(true); }
  void end_object() { out_ += '}'; fresh_.pop_back(); }
  void begin_array() { item(); out_ += '['; fresh_.push_back(true); }
  void end_array() { out_ += ']'; fresh_.pop_back(); }
  void key(const std::string& k) {
    item();
    out_ += '"';
    out_ += detail::json_escape(k);
    out_ += "\":";
    key_open_ = true;
  }
  void value(const std::string& v) {
    item();
    out_ += '"';
    out_ += detail::json_escape(v);
    out_ += '"';
  }
  void value(const char* v) { value(std::string(v)); }
  void value(double v) { item(); out_ += detail::number_text(v); }
  void value(std::int64_t v) { item(); out_ += std::to_string(v); }
  void value(std::uint64_t v) { item(); out_ += std::to_string(v); }
  void value(int v) { value(static_cast<std::int64_t>(v)); }
  void value(bool v) { item(); out_ += v ? "true" : "false"; }
  const std::string& text() const { return out_; }

 private:
  void item() {
    if (key_open_) {
      key_open_ = false;
      return;
    }
    if (!fresh_.empty()) {
      if (fresh_.back()) fresh_.back() = false;
      else out_ += ',';
    }
  }

  std::string out_;
  std::vector<bool> fresh_;
  bool key_open_ = false;
};

struct EnsembleStageSummary {
  std::int64_t alive = 0;
  std::vector<std::int64_t> counts;
  std::vector<double> empirical;  // counts / alive
  double chi_square = 0;
  int dof = 0;
  double threshold = 0;
};

struct EnsembleSummary {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::vector<EnsembleStageSummary> stages;
};

struct TwoStateReport {
  std::string subject;  // "chain" or "register"
  std::vector<TwoStateVector> sequence;
  std::string abl_query;
  std::optional<Distribution> abl;
  std::string weak_op;
  std::optional<complex> weak;
  std::vector<Distribution> combined;  // aligned with sequence when present
};

struct RunReport {
  std::string scenario;
  TransferPolicy policy = TransferPolicy::flow_derived;
  std::vector<StageExact> stages;
  std::optional<EnsembleSummary> ensemble;
  std::optional<AuditReport> audit;
  std::optional<TwoStateReport> twostate;
  std::vector<std::string> notes;
};

// Known discrepancies in the reference descriptions of the built-in
// scenarios; embedded in every report that runs them so exported results
// document the divergence instead of hiding it.
inline std::vector<std::string> scenario_notes(const std::string& name) {
  std::vector<std::string> notes;
  if (name == "crossed_mzi")
    notes.push_back(
        "reference description discrepancy: the stage-2 occupation table "
        "lists (R,l) + (R,r); the crossing step sends the inner arms to "
        "(L,r) + (R,l), and reports here follow the dynamics");
  if (name == "three_boxes")
    notes.push_back(
        "reference description discrepancy: the postselected photon state "
        "is quoted with prefactor (1/9)(1/sqrt 2), which carries total mass "
        "1/81; the quoted 1/9 postselection rate requires (1/3)(1/sqrt 2). "
        "Reports here use survival 1/9 with conditional state "
        "((a,R) + (b,R))/sqrt 2");
  return notes;
}

inline RunReport make_run_report(const ExperimentSpec& spec,
                                 const ExactPropagation& exact) {
  RunReport r;
  r.scenario = spec.name;
  r.policy = spec.policy;
  r.stages = exact.stages;
  r.notes = scenario_notes(spec.name);
  return r;
}

// Per-stage occupancy counts with the chi-square statistic against the
// exact Born distribution (labels with zero Born mass are excluded from
// the statistic; they are reported through the counts themselves).
inline EnsembleSummary summarize_ensemble(const TrajectoryEnsemble& ens,
                                          const ExactPropagation& exact) {
  EnsembleSummary out;
  out.n = ens.trajectories.size();
  out.seed = ens.seed;
  out.stages.resize(ens.spaces.size());
  for (std::size_t t = 0; t < ens.spaces.size(); ++t) {
    EnsembleStageSummary& s = out.stages[t];
    s.alive = ens.alive[t];
    s.counts = ens.counts[t];
    s.empirical.assign(s.counts.size(), 0.0);
    const Distribution& born = exact.stages[t].born;
    int live = 0;
    for (std::size_t i = 0; i < s.counts.size(); ++i) {
      if (s.alive > 0)
        s.empirical[i] =
            static_cast<double>(s.counts[i]) / static_cast<double>(s.alive);
      double p = born.p[i];
      if (p < 1e-15) continue;
      ++live;
      if (s.alive > 0) {
        double e = static_cast<double>(s.alive) * p;
        double d = static_cast<double>(s.counts[i]) - e;
        s.chi_square += d * d / e;
      }
    }
    s.dof = live - 1;
    s.threshold = s.dof > 0 ? chi_square_quantile_9999(s.dof) : 0.0;
  }
  return out;
}

// Boundary pair for a scenario whose last step is a costate filter: the
// filter's costate is the backward state on the contracted register, and
// the initial state must factor as register ⊗ rest, which gives the
// forward state. The intervening steps never move the register, so the
// pair captures the full pre/postselection.
inline TwoStateVector register_boundary_pair(const ExperimentSpec& spec) {
  validate_spec(spec);
  if (spec.steps.empty() || !spec.steps.back().is_costate_filter())
    throw std::invalid_argument("register pair needs a final costate filter");
  for (std::size_t k = 0; k + 1 < spec.steps.size(); ++k)
    if (spec.steps[k].kind == StepKind::filter)
      throw std::invalid_argument(
          "register pair needs a filter-free interval before the costate "
          "filter");
  if (!spec.keep_filters.empty())
    throw std::invalid_argument("register pair does not support keep filters");
  const StepOperator& filter = spec.steps.back();

  std::set<std::string> heads;
  for (const auto& label : filter.from.labels)
    heads.insert(split_factors(label).front());
  ConfigSpace reg = make_space(
      filter.from.stage, std::vector<std::string>(heads.begin(), heads.end()));

  WaveFunction backward;
  backward.space = reg;
  backward.amp.assign(static_cast<std::size_t>(reg.dim()), complex{0, 0});
  for (const auto& [label, a] : filter.costate) {
    int i = reg.index_of(label);
    if (i < 0)
      throw std::invalid_argument("costate label '" + label +
                                  "' is not a register value");
    backward.amp[static_cast<std::size_t>(i)] = a;
  }

  // Factor the initial state as f(register) * g(rest).
  const WaveFunction& init = spec.initial;
  std::map<std::string, std::map<std::string, complex>> by_head;
  for (int j = 0; j < init.space.dim(); ++j) {
    auto parts = split_factors(init.space.labels[static_cast<std::size_t>(j)]);
    std::string head = parts.front();
    if (reg.index_of(head) < 0)
      throw std::invalid_argument(
          "initial register value '" + head +
          "' is not contracted by the costate filter");
    parts.erase(parts.begin());
    by_head[head][join_factors(parts)] = init.amp[static_cast<std::size_t>(j)];
  }

  std::string ref_head, ref_tail;
  double best = 0;
  for (const auto& [head, tails] : by_head)
    for (const auto& [tail, a] : tails)
      if (std::abs(a) > best) {
        best = std::abs(a);
        ref_head = head;
        ref_tail = tail;
      }

  std::vector<complex> f(static_cast<std::size_t>(reg.dim()), complex{0, 0});
  for (const auto& [head, tails] : by_head) {
    auto it = tails.find(ref_tail);
    if (it != tails.end())
      f[static_cast<std::size_t>(reg.index_of(head))] = it->second;
  }
  const auto& ref_tails = by_head.at(ref_head);
  complex f_ref = f[static_cast<std::size_t>(reg.index_of(ref_head))];
  double f2 = 0, g2 = 0;
  for (const auto& a : f) f2 += std::norm(a);
  for (const auto& [tail, a] : ref_tails) g2 += std::norm(a / f_ref);
  if (std::abs(f2 * g2 - 1.0) > 1e-9)
    throw std::invalid_argument(
        "initial state does not factor over the register");
  for (const auto& [head, tails] : by_head)
    for (const auto& [tail, a] : tails) {
      auto it = ref_tails.find(tail);
      complex g = it == ref_tails.end() ? complex{0, 0} : it->second / f_ref;
      complex expect = f[static_cast<std::size_t>(reg.index_of(head))] * g;
      if (std::abs(a - expect) > 1e-9)
        throw std::invalid_argument(
            "initial state does not factor over the register");
    }

  WaveFunction forward;
  forward.space = reg;
  forward.amp = std::move(f);
  double scale = 1.0 / std::sqrt(f2);
  for (auto& a : forward.amp) a *= scale;
  return make_two_state(reg.stage, std::move(forward), std::move(backward));
}

// Product labels "x⊗y" render as "(x,y)" in human tables.
inline std::string pretty_label(const std::string& label) {
  auto parts = split_factors(label);
  if (parts.size() < 2) return label;
  std::string out = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += parts[i];
  }
  out += ")";
  return out;
}

inline std::string distribution_csv(const Distribution& d) {
  std::string out = "label,probability\n";
  for (int i = 0; i < d.space.dim(); ++i)
    out += detail::csv_field(d.space.labels[static_cast<std::size_t>(i)]) +
           "," + detail::number_text(d.p[static_cast<std::size_t>(i)]) + "\n";
  return out;
}

namespace detail {

inline void json_complex(JsonWriter& w, complex a) {
  w.begin_array();
  w.value(a.real());
  w.value(a.imag());
  w.end_array();
}

inline void json_wave(JsonWriter& w, const WaveFunction& psi) {
  w.begin_array();
  for (const auto& a : psi.amp) json_complex(w, a);
  w.end_array();
}

inline void json_labels(JsonWriter& w, const ConfigSpace& s) {
  w.begin_array();
  for (const auto& l : s.labels) w.value(l);
  w.end_array();
}

inline void json_doubles(JsonWriter& w, const std::vector<double>& v) {
  w.begin_array();
  for (double x : v) w.value(x);
  w.end_array();
}

inline void json_ints(JsonWriter& w, const std::vector<int>& v) {
  w.begin_array();
  for (int x : v) w.value(x);
  w.end_array();
}

inline void json_audit(JsonWriter& w, const AuditReport& a) {
  w.begin_object();
  w.key("consistent");
  w.value(a.consistent);
  w.key("conclusion");
  w.value(a.conclusion);
  w.key("wave_autonomy");
  w.begin_object();
  w.key("verdict");
  w.value(verdict_name(a.wave_autonomy));
  w.key("note");
  w.value(a.wave_autonomy_note);
  w.end_object();
  w.key("born");
  w.begin_object();
  w.key("verdict");
  w.value(verdict_name(a.born.verdict));
  w.key("stages_checked");
  json_ints(w, a.born.stages_checked);
  if (a.born.failure) {
    const BornStageEvidence& f = *a.born.failure;
    w.key("failure");
    w.begin_object();
    w.key("stage");
    w.value(f.stage);
    w.key("statistic");
    w.value(f.statistic);
    w.key("dof");
    w.value(f.dof);
    w.key("threshold");
    w.value(f.threshold);
    w.key("zero_occupied");
    w.begin_array();
    for (const LabelStat& z : f.zero_occupied) {
      w.begin_object();
      w.key("label");
      w.value(z.label);
      w.key("observed");
      w.value(z.observed);
      w.end_object();
    }
    w.end_array();
    w.end_object();
  }
  w.end_object();
  w.key("stationarity");
  w.begin_object();
  w.key("verdict");
  w.value(verdict_name(a.stationarity.verdict));
  w.key("steps_checked");
  json_ints(w, a.stationarity.steps_checked);
  if (a.stationarity.step) {
    w.key("violation");
    w.begin_object();
    w.key("step");
    w.value(*a.stationarity.step);
    w.key("column");
    w.value(a.stationarity.column);
    w.key("target");
    w.value(a.stationarity.target);
    w.key("mass");
    w.value(a.stationarity.mass);
    w.end_object();
  }
  w.end_object();
  w.key("locality");
  w.begin_object();
  w.key("verdict");
  w.value(verdict_name(a.locality.verdict));
  w.key("steps_checked");
  json_ints(w, a.locality.steps_checked);
  w.key("transitions");
  w.value(a.locality.transitions);
  w.key("violations");
  w.value(a.locality.violations);
  w.key("offending");
  w.begin_array();
  for (const TransitionCount& o : a.locality.offending) {
    w.begin_object();
    w.key("step");
    w.value(o.step);
    w.key("from");
    w.value(o.from);
    w.key("to");
    w.value(o.to);
    w.key("count");
    w.value(o.count);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.key("certificate");
  w.begin_object();
  w.key("applicable");
  w.value(a.certificate.applicable);
  w.key("feasible");
  w.value(a.certificate.feasible);
  if (a.certificate.step) {
    w.key("step");
    w.value(*a.certificate.step);
  }
  if (a.certificate.certificate) {
    const CutCertificate& c = *a.certificate.certificate;
    w.key("targets");
    w.begin_array();
    for (const auto& t : c.targets) w.value(t);
    w.end_array();
    w.key("reachable_sources");
    w.begin_array();
    for (const auto& s : c.reachable_sources) w.value(s);
    w.end_array();
    w.key("required_mass");
    w.value(c.required_mass);
    w.key("reachable_mass");
    w.value(c.reachable_mass);
  }
  w.end_object();
  w.end_object();
}

inline void json_twostate(JsonWriter& w, const TwoStateReport& t) {
  w.begin_object();
  w.key("subject");
  w.value(t.subject);
  w.key("stages");
  w.begin_array();
  for (const TwoStateVector& tsv : t.sequence) {
    w.begin_object();
    w.key("stage");
    w.value(tsv.stage);
    w.key("labels");
    json_labels(w, tsv.forward.space);
    w.key("forward");
    json_wave(w, tsv.forward);
    w.key("backward");
    json_wave(w, tsv.backward);
    w.key("overlap");
    json_complex(w, tsv.overlap);
    w.end_object();
  }
  w.end_array();
  if (t.abl) {
    w.key("abl");
    w.begin_object();
    w.key("query");
    w.value(t.abl_query);
    w.key("outcomes");
    json_labels(w, t.abl->space);
    w.key("p");
    json_doubles(w, t.abl->p);
    w.end_object();
  }
  if (t.weak) {
    w.key("weak");
    w.begin_object();
    w.key("op");
    w.value(t.weak_op);
    w.key("value");
    json_complex(w, *t.weak);
    w.end_object();
  }
  if (!t.combined.empty()) {
    w.key("combined");
    w.begin_array();
    for (std::size_t i = 0; i < t.combined.size(); ++i) {
      w.begin_object();
      w.key("stage");
      w.value(t.sequence[i].stage);
      w.key("labels");
      json_labels(w, t.combined[i].space);
      w.key("p");
      json_doubles(w, t.combined[i].p);
      w.end_object();
    }
    w.end_array();
  }
  w.end_object();
}

}  // namespace detail

inline std::string report_json(const RunReport& r) {
  JsonWriter w;
  w.begin_object();
  w.key("schema");
  w.value(1);
  w.key("tool");
  w.value(kToolName);
  w.key("version");
  w.value(kToolVersion);
  w.key("scenario");
  w.value(r.scenario);
  w.key("policy");
  w.value(transfer_policy_name(r.policy));
  if (!r.stages.empty()) {
    w.key("stages");
    w.begin_array();
    for (const StageExact& st : r.stages) {
      w.begin_object();
      w.key("stage");
      w.value(st.wave.space.stage);
      w.key("labels");
      detail::json_labels(w, st.wave.space);
      w.key("wave");
      detail::json_wave(w, st.wave);
      w.key("born");
      detail::json_doubles(w, st.born.p);
      w.key("particle");
      detail::json_doubles(w, st.particle.p);
      w.key("wave_survival");
      w.value(st.wave_survival);
      w.key("particle_survival");
      w.value(st.particle_survival);
      w.end_object();
    }
    w.end_array();
  }
  if (r.ensemble) {
    const EnsembleSummary& e = *r.ensemble;
    w.key("ensemble");
    w.begin_object();
    w.key("n");
    w.value(e.n);
    w.key("seed");
    w.value(e.seed);
    w.key("stages");
    w.begin_array();
    for (std::size_t t = 0; t < e.stages.size(); ++t) {
      const EnsembleStageSummary& s = e.stages[t];
      w.begin_object();
      w.key("stage");
      w.value(static_cast<int>(t));
      w.key("alive");
      w.value(s.alive);
      w.key("counts");
      w.begin_array();
      for (std::int64_t c : s.counts) w.value(c);
      w.end_array();
      w.key("empirical");
      detail::json_doubles(w, s.empirical);
      w.key("chi_square");
      w.value(s.chi_square);
      w.key("dof");
      w.value(s.dof);
      w.key("threshold");
      w.value(s.threshold);
      w.end_object();
    }
    w.end_array();
    w.end_object();
  }
  if (r.audit) {
    w.key("audit");
    detail::json_audit(w, *r.audit);
  }
  if (r.twostate) {
    w.key("twostate");
    detail::json_twostate(w, *r.twostate);
  }
  w.key("notes");
  w.begin_array();
  for (const auto& n : r.notes) w.value(n);
  w.end_array();
  w.end_object();
  return w.text();
}

namespace detail {

inline void table_distribution(std::string& out, const Distribution& d) {
  for (int i = 0; i < d.space.dim(); ++i)
    out += "  " + pretty_label(d.space.labels[static_cast<std::size_t>(i)]) +
           " " + human_number(d.p[static_cast<std::size_t>(i)]) + "\n";
}

}  // namespace detail

inline std::string run_table(const RunReport& r) {
  std::string out = "scenario " + r.scenario + " (policy " +
                    transfer_policy_name(r.policy) + ")\n";
  const StageExact& last = r.stages.back();
  out += "survival " + detail::human_number(last.wave_survival) + "\n";
  out += "final distribution\n";
  detail::table_distribution(out, last.born);
  if (r.ensemble) {
    const EnsembleSummary& e = *r.ensemble;
    out += "sampled n=" + std::to_string(e.n) +
           " seed=" + std::to_string(e.seed) + "\n";
    const EnsembleStageSummary& fs = e.stages.back();
    out += "final alive " + std::to_string(fs.alive) + "\n";
    out += "final empirical\n";
    Distribution emp{last.born.space, fs.empirical};
    detail::table_distribution(out, emp);
  }
  for (const auto& n : r.notes) out += "note: " + n + "\n";
  return out;
}

inline std::string audit_table(const RunReport& r) {
  const AuditReport& a = *r.audit;
  std::string out = "scenario " + r.scenario + " (policy " +
                    transfer_policy_name(r.policy) + ")\n";
  if (r.ensemble)
    out += "audit sample n=" + std::to_string(r.ensemble->n) +
           " seed=" + std::to_string(r.ensemble->seed) + "\n";
  out += std::string("wave autonomy: ") + verdict_name(a.wave_autonomy) + "\n";
  out += std::string("born statistics: ") + verdict_name(a.born.verdict);
  if (a.born.failure) {
    const BornStageEvidence& f = *a.born.failure;
    out += " at stage " + std::to_string(f.stage);
    if (!f.zero_occupied.empty()) {
      out += " (occupied zero-mass labels:";
      for (const LabelStat& z : f.zero_occupied)
        out += " " + pretty_label(z.label) + " x" + std::to_string(z.observed);
      out += ")";
    } else {
      out += " (statistic " + detail::human_number(f.statistic) +
             " over threshold " + detail::human_number(f.threshold) + ")";
    }
  }
  out += "\n";
  out += std::string("stationarity: ") + verdict_name(a.stationarity.verdict);
  if (a.stationarity.step)
    out += " (step " + std::to_string(*a.stationarity.step) + " moves " +
           detail::human_number(a.stationarity.mass) + " from " +
           pretty_label(a.stationarity.column) + " to " +
           pretty_label(a.stationarity.target) + ")";
  out += "\n";
  out += std::string("locality: ") + verdict_name(a.locality.verdict);
  if (a.locality.verdict != Verdict::not_applicable)
    out += " (" + std::to_string(a.locality.violations) + " of " +
           std::to_string(a.locality.transitions) +
           " masked transitions leave the mask)";
  out += "\n";
  for (const TransitionCount& o : a.locality.offending)
    out += "  step " + std::to_string(o.step) + ": " + pretty_label(o.from) +
           " -> " + pretty_label(o.to) + " x" + std::to_string(o.count) + "\n";
  if (!a.certificate.applicable) {
    out += "certificate: not applicable (no masks)\n";
  } else if (a.certificate.feasible) {
    out += "certificate: every masked step is feasible\n";
  } else {
    const CutCertificate& c = *a.certificate.certificate;
    out += "certificate: step " + std::to_string(*a.certificate.step) +
           " infeasible\n";
    out += "  cut targets";
    for (const auto& t : c.targets) out += " " + pretty_label(t);
    out += "\n  reachable sources";
    for (const auto& s : c.reachable_sources) out += " " + pretty_label(s);
    out += "\n  required " + detail::human_number(c.required_mass) +
           " reachable " + detail::human_number(c.reachable_mass) + "\n";
  }
  out += "conclusion: " + a.conclusion + "\n";
  for (const auto& n : r.notes) out += "note: " + n + "\n";
  return out;
}

inline std::string twostate_table(const RunReport& r) {
  const TwoStateReport& t = *r.twostate;
  std::string out =
      "scenario " + r.scenario + " (two-state " + t.subject + ")\n";
  for (const TwoStateVector& tsv : t.sequence)
    out += "stage " + std::to_string(tsv.stage) + " overlap " +
           detail::human_complex(tsv.overlap) + "\n";
  if (t.abl) {
    out += "abl outcomes (stage " + std::to_string(t.abl->space.stage) + ")\n";
    for (int i = 0; i < t.abl->space.dim(); ++i)
      out += t.abl->space.labels[static_cast<std::size_t>(i)] + ": " +
             detail::human_number(t.abl->p[static_cast<std::size_t>(i)]) +
             "\n";
  }
  if (t.weak)
    out += "weak " + t.weak_op + ": " + detail::human_complex(*t.weak) + "\n";
  for (std::size_t i = 0; i < t.combined.size(); ++i) {
    out += "combined guidance (stage " +
           std::to_string(t.sequence[i].stage) + ")\n";
    detail::table_distribution(out, t.combined[i]);
  }
  for (const auto& n : r.notes) out += "note: " + n + "\n";
  return out;
}

}  // namespace pwl
