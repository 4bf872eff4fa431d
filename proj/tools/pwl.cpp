#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pwl/dsl.hpp"
#include "pwl/experiments.hpp"
#include "pwl/report.hpp"
#include "pwl/version.hpp"

namespace {

using namespace pwl;

std::uint64_t env_default_seed() {
  const char* s = std::getenv("PWL_SEED");
  if (!s || !*s) return 1;
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (errno != 0 || end == s || *end != '\0')
    throw std::invalid_argument("PWL_SEED is not an unsigned integer");
  return v;
}

bool is_builtin(const std::string& name) {
  return name == "single_mzi" || name == "crossed_mzi" ||
         name == "three_boxes";
}

ExperimentSpec load_target(const std::string& target,
                           const std::string& variant) {
  if (is_builtin(target)) return build_scenario(target, variant);
  std::ifstream in(target, std::ios::binary);
  if (!in)
    throw std::invalid_argument("no such scenario or file: '" + target + "'");
  if (!variant.empty())
    throw std::invalid_argument("--variant applies to built-in scenarios only");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_experiment(text.str());
  } catch (const ParseError& e) {
    throw std::invalid_argument(target + ":" + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(target + ": " + e.what());
  }
}

void apply_policy(ExperimentSpec& spec, const std::string& policy) {
  if (policy.empty()) return;
  spec.policy = policy == "table" ? TransferPolicy::tabulated
                                  : TransferPolicy::flow_derived;
  validate_spec(spec);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + out_path + "'");
  out << text;
  out.flush();
  if (!out) throw std::invalid_argument("cannot write '" + out_path + "'");
}

struct RunArgs {
  std::string target, variant, policy, format = "table", out_path;
  std::uint64_t sample = 0;
  std::uint64_t seed = 1;
  int workers = 1;
};

int cmd_run(const RunArgs& a) {
  ExperimentSpec spec = load_target(a.target, a.variant);
  apply_policy(spec, a.policy);
  ExactPropagation exact = propagate_exact(spec);
  RunReport report = make_run_report(spec, exact);
  if (a.sample > 0) {
    TrajectoryEnsemble ens =
        sample_trajectories(spec, a.sample, a.seed, a.workers);
    report.ensemble = summarize_ensemble(ens, exact);
  }
  std::string text;
  if (a.format == "json") {
    text = report_json(report) + "\n";
  } else if (a.format == "csv") {
    Distribution d = report.stages.back().born;
    if (report.ensemble) d.p = report.ensemble->stages.back().empirical;
    text = distribution_csv(d);
  } else {
    text = run_table(report);
  }
  emit(a.out_path, text);
  return 0;
}

struct AuditArgs {
  std::string target, variant, policy, mask, format = "table", out_path;
  std::uint64_t sample = 20000;
  std::uint64_t seed = 1;
  int workers = 1;
};

int cmd_audit(const AuditArgs& a) {
  ExperimentSpec spec = load_target(a.target, a.variant);
  if (!a.mask.empty()) attach_named_mask(spec, a.mask);
  apply_policy(spec, a.policy);
  ExactPropagation exact = propagate_exact(spec);
  TrajectoryEnsemble ens =
      sample_trajectories(spec, a.sample, a.seed, a.workers);
  RunReport report = make_run_report(spec, exact);
  report.ensemble = summarize_ensemble(ens, exact);
  report.audit = run_audit(spec, ens);
  std::string text = a.format == "json" ? report_json(report) + "\n"
                                        : audit_table(report);
  emit(a.out_path, text);
  return report.audit->consistent ? 0 : 3;
}

struct TwoArgs {
  std::string target, variant, post, abl, weak, format = "table", out_path;
  bool combined = false;
  int stage = 1;
  bool stage_set = false;
};

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

int cmd_twostate(const TwoArgs& a) {
  ExperimentSpec spec = load_target(a.target, a.variant);
  RunReport report;
  report.scenario = spec.name;
  report.policy = spec.policy;
  report.notes = scenario_notes(spec.name);

  TwoStateReport ts;
  bool has_costate =
      !spec.steps.empty() && spec.steps.back().is_costate_filter();
  if (has_costate) {
    if (!a.post.empty())
      throw std::invalid_argument(
          "the scenario ends in a costate filter that fixes the "
          "postselection; --post does not apply");
    if (a.stage_set)
      throw std::invalid_argument("--stage does not apply to a register pair");
    ts.subject = "register";
    ts.sequence.push_back(register_boundary_pair(spec));
  } else {
    if (a.post.empty())
      throw std::invalid_argument(
          "this scenario needs --post LABEL to fix the final boundary");
    std::string label = a.post;
    if (label == "minus") label = "-";
    if (label == "plus") label = "+";
    const ConfigSpace& fin = spec.spaces.back();
    if (fin.index_of(label) < 0)
      throw std::invalid_argument("postselection label '" + label +
                                  "' is not on the final stage");
    WaveFunction post = make_wavefunction(fin, {{label, 1.0}});
    ts.subject = "chain";
    ts.sequence = two_state_sequence(spec, post);
  }

  std::size_t at = 0;
  if (ts.subject == "chain") {
    int stage = a.stage_set ? a.stage : (ts.sequence.size() > 1 ? 1 : 0);
    if (stage < 0 || stage >= static_cast<int>(ts.sequence.size()))
      throw std::invalid_argument("--stage is out of range");
    at = static_cast<std::size_t>(stage);
  }
  const TwoStateVector& tsv = ts.sequence[at];

  if (!a.abl.empty()) {
    std::vector<std::string> in_set = split_commas(a.abl);
    std::set<std::string> chosen;
    for (const auto& label : in_set) {
      if (tsv.forward.space.index_of(label) < 0)
        throw std::invalid_argument("abl label '" + label +
                                    "' is not on the analyzed space");
      chosen.insert(label);
    }
    std::vector<std::string> rest;
    for (const auto& label : tsv.forward.space.labels)
      if (!chosen.count(label)) rest.push_back(label);
    ProjectorFamily family;
    std::vector<std::string> picked(chosen.begin(), chosen.end());
    family.push_back({"in " + a.abl, picked});
    family.push_back({"not in " + a.abl, rest});
    ts.abl_query = a.abl;
    ts.abl = abl_probability(tsv, family);
  }

  if (!a.weak.empty()) {
    if (a.weak.size() <= 2 || a.weak.compare(0, 2, "Pi") != 0)
      throw std::invalid_argument("unknown operator '" + a.weak +
                                  "'; use Pi<label> for a projector");
    std::string label = a.weak.substr(2);
    auto op = projector_matrix(tsv.forward.space, {label});
    ts.weak_op = a.weak;
    ts.weak = weak_value(tsv, op);
  }

  if (a.combined)
    for (const TwoStateVector& s : ts.sequence)
      ts.combined.push_back(born_distribution(combined_guidance_wave(s)));

  report.twostate = std::move(ts);
  std::string text = a.format == "json" ? report_json(report) + "\n"
                                        : twostate_table(report);
  emit(a.out_path, text);
  return 0;
}

struct FmtArgs {
  std::string target, variant, out_path;
};

int cmd_fmt(const FmtArgs& a) {
  ExperimentSpec spec = load_target(a.target, a.variant);
  emit(a.out_path, serialize_experiment(spec));
  return 0;
}

void add_target_option(CLI::App* cmd, std::string& target) {
  cmd->add_option("scenario", target,
                  "built-in scenario (single_mzi, crossed_mzi, three_boxes) "
                  "or a .pwx file")
      ->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "coarse pilot-wave experiments: exact propagation, seeded sampling, "
      "principle audits and two-state analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version,-V",
                       std::string(kToolName) + " " + kToolVersion);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand(
      "run", "propagate a scenario and report its distributions");
  add_target_option(run, run_args.target);
  CLI::Option* run_sample = run->add_option(
      "--sample", run_args.sample, "number of Monte Carlo runs");
  bool run_exact = false;
  run->add_flag("--exact", run_exact, "exact propagation only (default)")
      ->excludes(run_sample);
  CLI::Option* run_seed = run->add_option(
      "--seed", run_args.seed, "sampler seed (default PWL_SEED or 1)");
  run->add_option("--policy", run_args.policy,
                  "particle transfer policy: flow or table")
      ->check(CLI::IsMember({"flow", "table"}));
  run->add_option("--format", run_args.format,
                  "output format: json, csv or table")
      ->check(CLI::IsMember({"json", "csv", "table"}));
  run->add_option("--out", run_args.out_path, "write the report to a file");
  run->add_option("--variant", run_args.variant, "scenario variant");
  run->add_option("--workers", run_args.workers, "sampler threads")
      ->check(CLI::Range(1, 64));

  AuditArgs audit_args;
  CLI::App* audit = app.add_subcommand(
      "audit", "check the dynamical principles on a sampled run");
  add_target_option(audit, audit_args.target);
  audit->add_option("--mask", audit_args.mask, "attach a named support mask");
  audit->add_option("--sample", audit_args.sample,
                    "number of Monte Carlo runs (default 20000)");
  CLI::Option* audit_seed = audit->add_option(
      "--seed", audit_args.seed, "sampler seed (default PWL_SEED or 1)");
  audit->add_option("--policy", audit_args.policy,
                    "particle transfer policy: flow or table")
      ->check(CLI::IsMember({"flow", "table"}));
  audit->add_option("--format", audit_args.format,
                    "output format: json or table")
      ->check(CLI::IsMember({"json", "table"}));
  audit->add_option("--out", audit_args.out_path,
                    "write the report to a file");
  audit->add_option("--variant", audit_args.variant, "scenario variant");
  audit->add_option("--workers", audit_args.workers, "sampler threads")
      ->check(CLI::Range(1, 64));

  TwoArgs two_args;
  CLI::App* two = app.add_subcommand(
      "twostate", "pre/postselected boundary analysis");
  add_target_option(two, two_args.target);
  two->add_option("--post", two_args.post,
                  "postselected final-stage label (aliases plus, minus)");
  two->add_option("--abl", two_args.abl,
                  "comma-separated label set: intermediate outcome "
                  "probabilities with both boundaries fixed");
  two->add_option("--weak", two_args.weak, "weak value of Pi<label>");
  two->add_flag("--combined-guidance", two_args.combined,
                "per-stage distributions guided by the combined "
                "forward+backward wave");
  CLI::Option* two_stage = two->add_option(
      "--stage", two_args.stage, "stage for --abl and --weak (default 1)");
  two->add_option("--format", two_args.format, "output format: json or table")
      ->check(CLI::IsMember({"json", "table"}));
  two->add_option("--out", two_args.out_path, "write the report to a file");
  two->add_option("--variant", two_args.variant, "scenario variant");

  FmtArgs fmt_args;
  CLI::App* fmt =
      app.add_subcommand("fmt", "canonicalize an experiment description");
  fmt->add_option("target", fmt_args.target,
                  "built-in scenario or a .pwx file")
      ->required();
  fmt->add_option("--out", fmt_args.out_path, "write the text to a file");
  fmt->add_option("--variant", fmt_args.variant, "scenario variant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      if (!run_seed->count()) run_args.seed = env_default_seed();
      return cmd_run(run_args);
    }
    if (*audit) {
      if (!audit_seed->count()) audit_args.seed = env_default_seed();
      return cmd_audit(audit_args);
    }
    if (*two) {
      two_args.stage_set = two_stage->count() > 0;
      return cmd_twostate(two_args);
    }
    if (*fmt) return cmd_fmt(fmt_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", kToolName, e.what());
    return 2;
  }
  return 0;
}
