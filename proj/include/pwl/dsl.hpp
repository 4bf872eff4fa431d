// Text format for experiment descriptions: a line-oriented grammar that
// compiles to ExperimentSpec, plus the canonical serializer whose output
// is a parser fixed point. Amplitudes admit the surd constants R2, R3, R6;
// table probabilities admit small fractions.
#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pwl/core.hpp"
#include "pwl/ensemble.hpp"
#include "pwl/experiments.hpp"

namespace pwl {

// Syntax error with a 1-based source position. Semantic problems (bad
// isometries, unnormalized states, dangling labels) surface as the
// validation errors thrown by the spec constructors instead.
struct ParseError : std::runtime_error {
  int line = 1;
  int col = 1;
  std::string message;
  std::vector<std::string> expected;

  ParseError(int line_, int col_, std::string msg,
             std::vector<std::string> exp = {})
      : std::runtime_error(std::to_string(line_) + ":" + std::to_string(col_) +
                           ": " + msg),
        line(line_),
        col(col_),
        message(std::move(msg)),
        expected(std::move(exp)) {}
};

namespace detail {

inline std::string dsl_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct AmpConstant {
  const char* name;
  double value;
};

inline const AmpConstant kAmpConstants[] = {
    {"R2", kR2}, {"R3", kR3}, {"R6", kR6}};

inline std::string real_amp_text(double v) {
  for (const auto& c : kAmpConstants) {
    if (std::abs(v - c.value) <= 1e-12) return c.name;
    if (std::abs(v + c.value) <= 1e-12) return std::string("-") + c.name;
  }
  return dsl_double(v);
}

inline std::string amp_text(complex a) {
  if (a.imag() == 0.0) return real_amp_text(a.real());
  if (a.real() == 0.0) return dsl_double(a.imag()) + "i";
  std::string s = dsl_double(a.real());
  std::string im = dsl_double(a.imag());
  if (im[0] != '-') s += "+";
  return s + im + "i";
}

inline std::string prob_text(double v) {
  for (int q = 1; q <= 64; ++q) {
    double r = std::round(v * q);
    if (r < 0) break;
    if (std::abs(v - r / q) <= 1e-12) {
      long long p = static_cast<long long>(r);
      if (q == 1) return std::to_string(p);
      return std::to_string(p) + "/" + std::to_string(q);
    }
  }
  return dsl_double(v);
}

struct DslToken {
  std::string text;
  bool word = true;
  int col = 1;
};

inline bool dsl_punct_char(char c) {
  return c == '{' || c == '}' || c == ',' || c == ';' || c == ':';
}

inline std::vector<DslToken> lex_line(const std::string& s) {
  std::vector<DslToken> out;
  std::size_t i = 0, n = s.size();
  while (i < n) {
    char c = s[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    if (dsl_punct_char(c)) {
      out.push_back({std::string(1, c), false, static_cast<int>(i) + 1});
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && s[i + 1] == '>') {
      out.push_back({"->", false, static_cast<int>(i) + 1});
      i += 2;
      continue;
    }
    std::size_t start = i;
    while (i < n) {
      char d = s[i];
      if (d == ' ' || d == '\t' || d == '\r' || d == '#' || dsl_punct_char(d))
        break;
      if (d == '-' && i + 1 < n && s[i + 1] == '>') break;
      ++i;
    }
    out.push_back({s.substr(start, i - start), true,
                   static_cast<int>(start) + 1});
  }
  return out;
}

inline bool full_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline bool full_integer(const std::string& s, long long& out) {
  if (s.empty() || s.size() > 18) return false;
  out = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return true;
}

struct LineCursor {
  std::vector<DslToken> toks;
  std::size_t i = 0;
  int line = 1;
  int eol = 1;

  bool done() const { return i >= toks.size(); }
  const DslToken& cur() const { return toks[i]; }
  int here() const { return done() ? eol : cur().col; }

  [[noreturn]] void fail(const std::string& msg,
                         std::vector<std::string> exp = {}) const {
    throw ParseError(line, here(), msg, std::move(exp));
  }
  DslToken take_word(const std::string& what) {
    if (done() || !cur().word) fail("expected " + what, {what});
    return toks[i++];
  }
  void take_punct(const std::string& p) {
    if (done() || cur().word || cur().text != p)
      fail("expected '" + p + "'", {p});
    ++i;
  }
  bool try_punct(const std::string& p) {
    if (!done() && !cur().word && cur().text == p) {
      ++i;
      return true;
    }
    return false;
  }
  int take_stage_number() {
    if (done() || !cur().word) fail("expected a stage number", {"a stage number"});
    long long v = 0;
    if (!full_integer(cur().text, v) || v > 1000000)
      fail("expected a stage number", {"a stage number"});
    ++i;
    return static_cast<int>(v);
  }
  void end() const {
    if (!done()) fail("unexpected input after the directive");
  }
};

inline complex parse_amp_token(const LineCursor& c, const DslToken& t) {
  const std::string& s = t.text;
  auto bad = [&]() -> ParseError {
    return ParseError(c.line, t.col, "expected an amplitude, got '" + s + "'",
                      {"an amplitude"});
  };
  auto finite = [&](double v) {
    if (!std::isfinite(v))
      throw ParseError(c.line, t.col, "amplitude is not finite");
    return v;
  };
  for (const auto& k : kAmpConstants) {
    if (s == k.name) return complex{k.value, 0.0};
    if (s.size() == std::string(k.name).size() + 1 && s[0] == '-' &&
        s.compare(1, std::string::npos, k.name) == 0)
      return complex{-k.value, 0.0};
  }
  double v = 0;
  if (full_double(s, v)) return complex{finite(v), 0.0};
  if (s.back() == 'i') {
    std::string head = s.substr(0, s.size() - 1);
    if (head.empty() || head == "+") return complex{0.0, 1.0};
    if (head == "-") return complex{0.0, -1.0};
    if (full_double(head, v)) return complex{0.0, finite(v)};
    // compound form RE+IMi / RE-IMi
    for (std::size_t p = 1; p + 1 < head.size(); ++p) {
      if (head[p] != '+' && head[p] != '-') continue;
      char prev = head[p - 1];
      if (prev == 'e' || prev == 'E') continue;
      double re = 0, im = 0;
      if (full_double(head.substr(0, p), re) &&
          full_double(head.substr(p), im))
        return complex{finite(re), finite(im)};
    }
  }
  throw bad();
}

inline double parse_prob_token(const LineCursor& c, const DslToken& t) {
  const std::string& s = t.text;
  std::size_t slash = s.find('/');
  if (slash != std::string::npos && slash > 0 && slash + 1 < s.size()) {
    long long p = 0, q = 0;
    if (full_integer(s.substr(0, slash), p) &&
        full_integer(s.substr(slash + 1), q)) {
      if (q == 0)
        throw ParseError(c.line, t.col, "fraction has zero denominator");
      return static_cast<double>(p) / static_cast<double>(q);
    }
  }
  double v = 0;
  if (full_double(s, v)) {
    if (!std::isfinite(v))
      throw ParseError(c.line, t.col, "probability is not finite");
    return v;
  }
  throw ParseError(c.line, t.col, "expected a probability, got '" + s + "'",
                   {"a probability"});
}

}  // namespace detail

inline ExperimentSpec parse_experiment(const std::string& text) {
  using detail::DslToken;
  using detail::LineCursor;

  std::string name;
  bool have_name = false;
  std::map<int, std::vector<std::string>> stage_labels;
  std::map<int, ColumnSpec> step_cols;
  std::map<int, std::vector<std::pair<std::string, complex>>> costates;
  std::map<int, std::vector<std::string>> keeps;
  std::map<int, std::vector<std::pair<std::string, std::string>>> mask_pairs;
  std::map<int,
           std::vector<std::pair<std::string,
                                 std::vector<std::pair<double, std::string>>>>>
      table_cols;
  std::optional<std::vector<std::pair<std::string, complex>>> init_terms;
  std::optional<TransferPolicy> policy;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    LineCursor c;
    c.toks = detail::lex_line(raw);
    if (c.toks.empty()) continue;
    c.line = line_no;
    const DslToken& last = c.toks.back();
    c.eol = last.col + static_cast<int>(last.text.size());

    const DslToken head = c.toks[0];
    if (!head.word)
      throw ParseError(line_no, head.col, "expected a directive",
                       {"experiment", "stage", "step", "mask", "filter",
                        "init", "policy", "table"});
    if (!have_name && head.text != "experiment")
      throw ParseError(line_no, head.col, "expected 'experiment'",
                       {"experiment"});
    ++c.i;

    if (head.text == "experiment") {
      if (have_name)
        throw ParseError(line_no, head.col, "duplicate 'experiment' directive");
      name = c.take_word("a name").text;
      c.end();
      have_name = true;
    } else if (head.text == "stage") {
      const int numcol = c.here();
      int t = c.take_stage_number();
      DslToken kw = c.take_word("'basis'");
      if (kw.text != "basis")
        throw ParseError(line_no, kw.col, "expected 'basis'", {"basis"});
      c.take_punct("{");
      std::vector<std::string> labels;
      if (!c.try_punct("}")) {
        labels.push_back(c.take_word("a label").text);
        while (c.try_punct(",")) labels.push_back(c.take_word("a label").text);
        c.take_punct("}");
      }
      c.end();
      if (stage_labels.count(t))
        throw ParseError(line_no, numcol,
                         "stage " + std::to_string(t) + " declared twice");
      stage_labels[t] = std::move(labels);
    } else if (head.text == "step" || head.text == "table") {
      bool is_table = head.text == "table";
      int a = c.take_stage_number();
      c.take_punct("->");
      const int bcol = c.here();
      int b = c.take_stage_number();
      if (b != a + 1)
        throw ParseError(line_no, bcol, "step stages must be consecutive");
      c.take_punct("{");
      if (is_table)
        table_cols[a];
      else
        step_cols[a];
      if (!c.try_punct("}")) {
        do {
          std::string in_label = c.take_word("a label").text;
          c.take_punct("->");
          if (is_table) {
            std::vector<std::pair<double, std::string>> terms;
            do {
              DslToken pt = c.take_word("a probability");
              double p = detail::parse_prob_token(c, pt);
              c.take_punct(":");
              terms.push_back({p, c.take_word("a label").text});
            } while (c.try_punct(","));
            table_cols[a].push_back({in_label, std::move(terms)});
          } else {
            std::vector<std::pair<complex, std::string>> terms;
            do {
              DslToken at = c.take_word("an amplitude");
              complex amp = detail::parse_amp_token(c, at);
              c.take_punct(":");
              terms.push_back({amp, c.take_word("a label").text});
            } while (c.try_punct(","));
            step_cols[a].push_back({in_label, std::move(terms)});
          }
        } while (c.try_punct(";"));
        c.take_punct("}");
      }
      c.end();
    } else if (head.text == "mask") {
      int a = c.take_stage_number();
      c.take_punct("->");
      const int bcol = c.here();
      int b = c.take_stage_number();
      if (b != a + 1)
        throw ParseError(line_no, bcol, "step stages must be consecutive");
      c.take_punct("{");
      mask_pairs[a];
      if (!c.try_punct("}")) {
        do {
          std::string in_label = c.take_word("a label").text;
          c.take_punct("->");
          do {
            mask_pairs[a].push_back({in_label, c.take_word("a label").text});
          } while (c.try_punct(","));
        } while (c.try_punct(";"));
        c.take_punct("}");
      }
      c.end();
    } else if (head.text == "filter") {
      const int numcol = c.here();
      int t = c.take_stage_number();
      DslToken kw = c.take_word("'keep' or 'costate'");
      if (kw.text == "keep") {
        c.take_punct("{");
        std::vector<std::string> labels;
        if (!c.try_punct("}")) {
          labels.push_back(c.take_word("a label").text);
          while (c.try_punct(",")) labels.push_back(c.take_word("a label").text);
          c.take_punct("}");
        }
        c.end();
        if (keeps.count(t))
          throw ParseError(line_no, numcol,
                           "duplicate keep filter for stage " +
                               std::to_string(t));
        keeps[t] = std::move(labels);
      } else if (kw.text == "costate") {
        c.take_punct("{");
        std::vector<std::pair<std::string, complex>> terms;
        if (!c.try_punct("}")) {
          do {
            DslToken at = c.take_word("an amplitude");
            complex amp = detail::parse_amp_token(c, at);
            c.take_punct(":");
            terms.push_back({c.take_word("a label").text, amp});
          } while (c.try_punct(","));
          c.take_punct("}");
        }
        c.end();
        if (costates.count(t))
          throw ParseError(line_no, numcol,
                           "duplicate costate filter for stage " +
                               std::to_string(t));
        costates[t] = std::move(terms);
      } else {
        throw ParseError(line_no, kw.col, "expected 'keep' or 'costate'",
                         {"keep", "costate"});
      }
    } else if (head.text == "init") {
      if (init_terms)
        throw ParseError(line_no, head.col, "duplicate 'init' directive");
      c.take_punct("{");
      std::vector<std::pair<std::string, complex>> terms;
      if (!c.try_punct("}")) {
        do {
          DslToken at = c.take_word("an amplitude");
          complex amp = detail::parse_amp_token(c, at);
          c.take_punct(":");
          terms.push_back({c.take_word("a label").text, amp});
        } while (c.try_punct(","));
        c.take_punct("}");
      }
      c.end();
      init_terms = std::move(terms);
    } else if (head.text == "policy") {
      if (policy)
        throw ParseError(line_no, head.col, "duplicate 'policy' directive");
      DslToken kw = c.take_word("'flow' or 'table'");
      c.end();
      if (kw.text == "flow")
        policy = TransferPolicy::flow_derived;
      else if (kw.text == "table")
        policy = TransferPolicy::tabulated;
      else
        throw ParseError(line_no, kw.col, "expected 'flow' or 'table'",
                         {"flow", "table"});
    } else {
      throw ParseError(line_no, head.col,
                       "unknown directive '" + head.text + "'",
                       {"stage", "step", "mask", "filter", "init", "policy",
                        "table"});
    }
  }

  if (!have_name) throw ParseError(1, 1, "expected 'experiment'", {"experiment"});
  if (stage_labels.empty())
    throw std::invalid_argument("experiment declares no stages");
  int n = stage_labels.rbegin()->first + 1;
  ExperimentSpec spec;
  spec.name = name;
  for (int t = 0; t < n; ++t) {
    auto it = stage_labels.find(t);
    if (it == stage_labels.end())
      throw std::invalid_argument("stage " + std::to_string(t) +
                                  " is not declared");
    spec.spaces.push_back(make_space(t, it->second, true));
  }
  for (const auto& [k, cols] : step_cols) {
    (void)cols;
    if (k < 0 || k > n - 2)
      throw std::invalid_argument("step " + std::to_string(k) + "->" +
                                  std::to_string(k + 1) +
                                  " references an undeclared stage");
  }
  for (const auto& [t, terms] : costates) {
    (void)terms;
    if (t == 0)
      throw std::invalid_argument("costate filter cannot target stage 0");
    if (t > n - 1)
      throw std::invalid_argument("costate filter targets undeclared stage " +
                                  std::to_string(t));
  }
  for (int k = 0; k + 1 < n; ++k) {
    bool has_cols = step_cols.count(k) != 0;
    bool has_costate = costates.count(k + 1) != 0;
    if (has_cols && has_costate)
      throw std::invalid_argument(
          "step " + std::to_string(k) + "->" + std::to_string(k + 1) +
          " declared both as a step and a costate filter");
    if (has_costate)
      spec.steps.push_back(make_costate_filter(
          spec.spaces[k], spec.spaces[k + 1], costates.at(k + 1)));
    else if (has_cols) {
      StepKind kind = spec.spaces[k].dim() == spec.spaces[k + 1].dim()
                          ? StepKind::unitary
                          : StepKind::isometry;
      spec.steps.push_back(make_step_from_columns(
          kind, spec.spaces[k], spec.spaces[k + 1], step_cols.at(k)));
    } else {
      throw std::invalid_argument("no step declared from stage " +
                                  std::to_string(k) + " to stage " +
                                  std::to_string(k + 1));
    }
  }
  for (const auto& [t, labels] : keeps) {
    if (t < 0 || t >= n)
      throw std::invalid_argument("keep filter on undeclared stage " +
                                  std::to_string(t));
    spec.keep_filters[t] = make_keep_filter(spec.spaces[t], labels);
  }
  for (const auto& [k, pairs] : mask_pairs) {
    if (k < 0 || k > n - 2)
      throw std::invalid_argument("mask " + std::to_string(k) + "->" +
                                  std::to_string(k + 1) +
                                  " references an undeclared stage");
    spec.masks[k] =
        detail::mask_from_pairs(spec.spaces[k], spec.spaces[k + 1], "", pairs);
  }
  for (const auto& [k, cols] : table_cols) {
    if (k < 0 || k > n - 2)
      throw std::invalid_argument("table " + std::to_string(k) + "->" +
                                  std::to_string(k + 1) +
                                  " references an undeclared stage");
    spec.tables[k] =
        detail::table_from_columns(spec.spaces[k], spec.spaces[k + 1], cols);
  }
  if (!init_terms) throw std::invalid_argument("experiment has no init");
  {
    std::vector<complex> amp(spec.spaces[0].dim(), complex{0, 0});
    for (const auto& [label, a] : *init_terms) {
      int i = spec.spaces[0].index_of(label);
      if (i < 0)
        throw std::invalid_argument("init amplitude on unknown label '" +
                                    label + "'");
      amp[static_cast<std::size_t>(i)] += a;
    }
    double n2 = 0;
    for (const auto& a : amp) n2 += std::norm(a);
    if (std::abs(n2 - 1.0) > 1e-9)
      throw std::invalid_argument("init not normalized (norm " +
                                  detail::format_double(n2) + ")");
    spec.initial = WaveFunction{spec.spaces[0], std::move(amp)};
  }
  if (policy) spec.policy = *policy;
  validate_spec(spec);
  return spec;
}

inline std::string serialize_experiment(const ExperimentSpec& spec) {
  using detail::amp_text;
  using detail::prob_text;
  validate_spec(spec);
  std::ostringstream out;
  out << "experiment " << spec.name << "\n";
  for (const auto& space : spec.spaces) {
    out << "stage " << space.stage << " basis { ";
    for (std::size_t i = 0; i < space.labels.size(); ++i)
      out << (i ? ", " : "") << space.labels[i];
    out << " }\n";
  }
  for (int k = 0; k < spec.step_count(); ++k) {
    const StepOperator& s = spec.steps[k];
    if (s.is_costate_filter()) {
      out << "filter " << k + 1 << " costate { ";
      for (std::size_t i = 0; i < s.costate.size(); ++i)
        out << (i ? ", " : "") << amp_text(s.costate[i].second) << ": "
            << s.costate[i].first;
      out << " }\n";
      continue;
    }
    out << "step " << k << "->" << k + 1 << " { ";
    bool first_col = true;
    for (int j = 0; j < s.from.dim(); ++j) {
      bool any = false;
      for (int i = 0; i < s.to.dim(); ++i)
        if (s.m[i][j] != complex{0, 0}) any = true;
      if (!any) continue;
      if (!first_col) out << "; ";
      first_col = false;
      out << s.from.labels[j] << " -> ";
      bool first_term = true;
      for (int i = 0; i < s.to.dim(); ++i) {
        if (s.m[i][j] == complex{0, 0}) continue;
        if (!first_term) out << ", ";
        first_term = false;
        out << amp_text(s.m[i][j]) << ": " << s.to.labels[i];
      }
    }
    out << " }\n";
  }
  for (const auto& [t, f] : spec.keep_filters) {
    out << "filter " << t << " keep { ";
    for (std::size_t i = 0; i < f.keep.size(); ++i)
      out << (i ? ", " : "") << f.keep[i];
    out << " }\n";
  }
  out << "init { ";
  {
    bool first = true;
    for (int i = 0; i < spec.initial.space.dim(); ++i) {
      if (spec.initial.amp[i] == complex{0, 0}) continue;
      if (!first) out << ", ";
      first = false;
      out << amp_text(spec.initial.amp[i]) << ": "
          << spec.initial.space.labels[i];
    }
  }
  out << " }\n";
  if (spec.policy == TransferPolicy::tabulated) out << "policy table\n";
  for (const auto& [k, mask] : spec.masks) {
    std::string body;
    for (int j = 0; j < mask.from.dim(); ++j) {
      std::string terms;
      for (int i = 0; i < mask.to.dim(); ++i) {
        if (!mask.allow[i][j]) continue;
        if (!terms.empty()) terms += ", ";
        terms += mask.to.labels[i];
      }
      if (terms.empty()) continue;
      if (!body.empty()) body += "; ";
      body += mask.from.labels[j] + " -> " + terms;
    }
    out << "mask " << k << "->" << k + 1
        << (body.empty() ? " { }" : " { " + body + " }") << "\n";
  }
  for (const auto& [k, table] : spec.tables) {
    std::string body;
    for (int j = 0; j < table.from.dim(); ++j) {
      std::string terms;
      for (int i = 0; i < table.to.dim(); ++i) {
        if (table.p[i][j] == 0.0) continue;
        if (!terms.empty()) terms += ", ";
        terms += prob_text(table.p[i][j]) + ": " + table.to.labels[i];
      }
      if (terms.empty()) continue;
      if (!body.empty()) body += "; ";
      body += table.from.labels[j] + " -> " + terms;
    }
    out << "table " << k << "->" << k + 1
        << (body.empty() ? " { }" : " { " + body + " }") << "\n";
  }
  return out.str();
}

// Structural equality up to a numeric tolerance. Mask descriptions and
// derived source-support flags are bookkeeping, not structure.
inline bool specs_equivalent(const ExperimentSpec& a, const ExperimentSpec& b,
                             double tol = 1e-12) {
  if (a.name != b.name || a.policy != b.policy) return false;
  if (a.spaces != b.spaces) return false;
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    const StepOperator& s = a.steps[k];
    const StepOperator& t = b.steps[k];
    if (s.kind != t.kind || !(s.from == t.from) || !(s.to == t.to))
      return false;
    if (s.keep != t.keep) return false;
    if (s.costate.size() != t.costate.size()) return false;
    for (std::size_t i = 0; i < s.costate.size(); ++i) {
      if (s.costate[i].first != t.costate[i].first) return false;
      if (std::abs(s.costate[i].second - t.costate[i].second) > tol)
        return false;
    }
    for (int i = 0; i < s.to.dim(); ++i)
      for (int j = 0; j < s.from.dim(); ++j)
        if (std::abs(s.m[i][j] - t.m[i][j]) > tol) return false;
  }
  auto same_keys = [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return false;
    auto it = y.begin();
    for (const auto& [k, v] : x) {
      (void)v;
      if (it->first != k) return false;
      ++it;
    }
    return true;
  };
  if (!same_keys(a.keep_filters, b.keep_filters)) return false;
  for (const auto& [t, f] : a.keep_filters)
    if (f.keep != b.keep_filters.at(t).keep) return false;
  if (!same_keys(a.masks, b.masks)) return false;
  for (const auto& [k, m] : a.masks) {
    const SupportMask& o = b.masks.at(k);
    if (!(m.from == o.from) || !(m.to == o.to) || m.allow != o.allow)
      return false;
  }
  if (!same_keys(a.tables, b.tables)) return false;
  for (const auto& [k, t] : a.tables) {
    const TransferMatrix& o = b.tables.at(k);
    if (!(t.from == o.from) || !(t.to == o.to)) return false;
    for (int i = 0; i < t.to.dim(); ++i)
      for (int j = 0; j < t.from.dim(); ++j)
        if (std::abs(t.p[i][j] - o.p[i][j]) > tol) return false;
  }
  if (!(a.initial.space == b.initial.space)) return false;
  for (int i = 0; i < a.initial.space.dim(); ++i)
    if (std::abs(a.initial.amp[i] - b.initial.amp[i]) > tol) return false;
  return true;
}

}  // namespace pwl
