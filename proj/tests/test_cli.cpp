// End-to-end tests for the pwl binary: formats, exit codes, determinism
// and error reporting, with an independent JSON parser as the read-back
// oracle for everything the tool emits.
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pwl/dsl.hpp"
#include "pwl/experiments.hpp"
#include "pwl/report.hpp"

using namespace pwl;
using Catch::Matchers::ContainsSubstring;
using nlohmann::json;

namespace {

const std::string SEP = kTensorSep;

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string read_all(int fd) {
  std::string text;
  char buf[4096];
  while (true) {
    ssize_t n = read(fd, buf, sizeof buf);
    if (n <= 0) break;
    text.append(buf, static_cast<std::size_t>(n));
  }
  return text;
}

CmdResult run_cli(const std::vector<std::string>& args,
                  const std::vector<std::pair<std::string, std::string>>&
                      env = {}) {
  int out_pipe[2], err_pipe[2];
  REQUIRE(pipe(out_pipe) == 0);
  REQUIRE(pipe(err_pipe) == 0);
  pid_t pid = fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    dup2(out_pipe[1], 1);
    dup2(err_pipe[1], 2);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    unsetenv("PWL_SEED");
    for (const auto& [k, v] : env) setenv(k.c_str(), v.c_str(), 1);
    std::vector<std::string> full;
    full.push_back(PWL_CLI_PATH);
    full.insert(full.end(), args.begin(), args.end());
    std::vector<char*> argv;
    argv.reserve(full.size() + 1);
    for (auto& s : full) argv.push_back(s.data());
    argv.push_back(nullptr);
    execv(PWL_CLI_PATH, argv.data());
    _exit(127);
  }
  close(out_pipe[1]);
  close(err_pipe[1]);
  CmdResult r;
  r.out = read_all(out_pipe[0]);
  r.err = read_all(err_pipe[0]);
  close(out_pipe[0]);
  close(err_pipe[0]);
  int status = 0;
  REQUIRE(waitpid(pid, &status, 0) == pid);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_temp(const std::string& text) {
  char path[] = "/tmp/pwl_cli_XXXXXX.pwx";
  int fd = mkstemps(path, 4);
  REQUIRE(fd >= 0);
  REQUIRE(write(fd, text.data(), text.size()) ==
          static_cast<ssize_t>(text.size()));
  close(fd);
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int label_index(const json& labels, const std::string& want) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i].get<std::string>() == want) return static_cast<int>(i);
  FAIL("label not present: " + want);
  return -1;
}

}  // namespace

TEST_CASE("version flag prints the tool banner") {
  CmdResult r = run_cli({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out == "pwl 0.1.0\n");
}

TEST_CASE("run prints an exact table for the single interferometer") {
  CmdResult r = run_cli({"run", "single_mzi"});
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  CHECK_THAT(r.out, ContainsSubstring("scenario single_mzi (policy flow)\n"));
  CHECK_THAT(r.out, ContainsSubstring("survival 1.0\n"));
  CHECK_THAT(r.out, ContainsSubstring("\n  + 1.0\n"));
  CHECK_THAT(r.out, ContainsSubstring("\n  - 0.0\n"));
}

TEST_CASE("run table for the crossed pair shows the postselected halves") {
  CmdResult r =
      run_cli({"run", "crossed_mzi", "--exact", "--format", "table"});
  CHECK(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("survival 0.5\n"));
  CHECK_THAT(r.out, ContainsSubstring("\n  (+,-) 0.5\n"));
  CHECK_THAT(r.out, ContainsSubstring("\n  (-,+) 0.5\n"));
  CHECK_THAT(r.out, ContainsSubstring("note: "));
  CHECK_THAT(r.out, ContainsSubstring("crossing step"));
}

TEST_CASE("sampled run emits schema-stable JSON with accurate statistics") {
  CmdResult r = run_cli({"run", "three_boxes", "--sample", "100000", "--seed",
                         "7", "--format", "json"});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j.at("schema").get<int>() == 1);
  CHECK(j.at("tool").get<std::string>() == "pwl");
  CHECK(j.at("version").get<std::string>() == "0.1.0");
  CHECK(j.at("scenario").get<std::string>() == "three_boxes");
  CHECK(j.at("policy").get<std::string>() == "flow");

  const json& final_stage = j.at("stages").back();
  CHECK(std::abs(final_stage.at("wave_survival").get<double>() - 1.0 / 9.0) <
        1e-12);

  const json& ens = j.at("ensemble");
  CHECK(ens.at("n").get<long long>() == 100000);
  CHECK(ens.at("seed").get<long long>() == 7);
  const json& labels = final_stage.at("labels");
  const json& counts = ens.at("stages").back().at("counts");
  CHECK(counts[label_index(labels, "a" + SEP + "T")].get<long long>() == 0);
  CHECK(counts[label_index(labels, "b" + SEP + "T")].get<long long>() == 0);

  double alive = ens.at("stages").back().at("alive").get<double>();
  double emp = ens.at("stages")
                   .back()
                   .at("empirical")[label_index(labels, "a" + SEP + "R")]
                   .get<double>();
  CHECK(std::abs(emp - 0.5) <= 5.0 * std::sqrt(0.25 / alive));

  REQUIRE(j.at("notes").size() == 1);
  CHECK_THAT(j.at("notes")[0].get<std::string>(),
             ContainsSubstring("requires (1/3)"));
}

TEST_CASE("identical inputs give byte-identical JSON across worker counts") {
  std::vector<std::string> base = {"run",    "three_boxes", "--sample",
                                   "20000",  "--seed",      "9",
                                   "--format", "json"};
  CmdResult once = run_cli(base);
  CmdResult again = run_cli(base);
  REQUIRE(once.code == 0);
  CHECK(once.out == again.out);

  std::vector<std::string> one = base, four = base;
  one.insert(one.end(), {"--workers", "1"});
  four.insert(four.end(), {"--workers", "4"});
  CmdResult w1 = run_cli(one);
  CmdResult w4 = run_cli(four);
  REQUIRE(w1.code == 0);
  REQUIRE(w4.code == 0);
  CHECK(w1.out == once.out);
  CHECK(w4.out == once.out);
}

TEST_CASE("an unknown target is a clean input error") {
  CmdResult r = run_cli({"run", "missing.pwx"});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK_THAT(r.err,
             ContainsSubstring("no such scenario or file: 'missing.pwx'"));
}

TEST_CASE("parse failures carry file, line and column") {
  std::string path = write_temp("experiment broken\nstage 0 basis { x\n");
  CmdResult r = run_cli({"run", path});
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring(path + ":2:"));
  CHECK_THAT(r.err, ContainsSubstring("expected"));
  unlink(path.c_str());
}

TEST_CASE("fmt canonicalizes a noisy description to the serializer's bytes") {
  std::string noisy =
      "# layout scratchpad\n"
      "\n"
      "experiment   single_mzi\n"
      "stage 0 basis { + ,  - }\n"
      "stage  1 basis { L, R }\n"
      "stage 2 basis{+,-}\n"
      "step 0->1 { + -> R2 : L , R2: R ; - -> R2: L, -R2: R }\n"
      "\n"
      "step 1->2 { L -> R2: +, R2: -; R -> R2: +, -R2: - }\n"
      "init { 1 : + }\n"
      "table 0->1 { + -> 1/2: L, 1/2: R; - -> 1/2: L, 1/2: R }\n"
      "table 1->2 { L -> 1: +; R -> 1: + }   # straight-through plates\n";
  std::string path = write_temp(noisy);
  std::string canonical = serialize_experiment(build_single_mzi());

  CmdResult from_file = run_cli({"fmt", path});
  CHECK(from_file.code == 0);
  CHECK(from_file.out == canonical);

  CmdResult from_builtin = run_cli({"fmt", "single_mzi"});
  CHECK(from_builtin.code == 0);
  CHECK(from_builtin.out == canonical);
  unlink(path.c_str());
}

TEST_CASE("a canonical file and the built-in scenario report identically") {
  std::string path = write_temp(serialize_experiment(build_three_boxes()));
  CmdResult from_file = run_cli({"run", path, "--format", "json"});
  CmdResult builtin = run_cli({"run", "three_boxes", "--format", "json"});
  REQUIRE(from_file.code == 0);
  REQUIRE(builtin.code == 0);
  CHECK(from_file.out == builtin.out);
  unlink(path.c_str());
}

TEST_CASE("audit flags the three-box contradiction with a certificate") {
  CmdResult table = run_cli({"audit", "three_boxes"});
  CHECK(table.code == 3);
  CHECK_THAT(table.out, ContainsSubstring("locality: violated"));
  CHECK_THAT(table.out, ContainsSubstring("certificate: step 2 infeasible"));
  CHECK_THAT(table.out,
             ContainsSubstring("conclusion: incompatible: step 2"));

  CmdResult r = run_cli({"audit", "three_boxes", "--format", "json"});
  CHECK(r.code == 3);
  json j = json::parse(r.out);
  const json& audit = j.at("audit");
  CHECK(audit.at("consistent").get<bool>() == false);
  CHECK(audit.at("born").at("verdict").get<std::string>() == "holds");
  CHECK(audit.at("locality").at("verdict").get<std::string>() == "violated");
  const json& cert = audit.at("certificate");
  CHECK(cert.at("applicable").get<bool>());
  CHECK(cert.at("feasible").get<bool>() == false);
  CHECK(cert.at("step").get<int>() == 2);
  std::vector<std::string> targets = cert.at("targets");
  CHECK(targets == std::vector<std::string>{"a" + SEP + "R", "b" + SEP + "R"});
  CHECK(std::abs(cert.at("required_mass").get<double>() - 1.0) < 1e-9);
  CHECK(std::abs(cert.at("reachable_mass").get<double>() - 1.0 / 3.0) < 1e-9);
}

TEST_CASE("audit passes the unmasked interferometer") {
  CmdResult r = run_cli({"audit", "single_mzi"});
  CHECK(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("all audited principles hold"));
  CHECK_THAT(r.out, ContainsSubstring("locality: not-applicable"));
}

TEST_CASE("audit with the straight-line mask certifies the recombiner") {
  CmdResult r = run_cli({"audit", "single_mzi", "--mask", "straight"});
  CHECK(r.code == 3);
  CHECK_THAT(r.out, ContainsSubstring("locality: violated"));
  CHECK_THAT(r.out, ContainsSubstring("certificate: step 1 infeasible"));
  CHECK_THAT(r.out, ContainsSubstring("conclusion: incompatible: step 1"));
}

TEST_CASE("tabulated policy trades the violated principle") {
  CmdResult r =
      run_cli({"audit", "three_boxes", "--policy", "table", "--format",
               "json"});
  CHECK(r.code == 3);
  json j = json::parse(r.out);
  const json& audit = j.at("audit");
  CHECK(j.at("policy").get<std::string>() == "table");
  CHECK(audit.at("born").at("verdict").get<std::string>() == "violated");
  CHECK(audit.at("locality").at("verdict").get<std::string>() == "holds");
  CHECK(audit.at("certificate").at("feasible").get<bool>() == false);

  std::vector<std::string> occupied;
  for (const json& z : audit.at("born").at("failure").at("zero_occupied"))
    occupied.push_back(z.at("label").get<std::string>());
  CHECK(occupied ==
        std::vector<std::string>{"a" + SEP + "T", "b" + SEP + "T"});
}

TEST_CASE("ABL outcome probabilities with both boundaries fixed") {
  CmdResult a = run_cli({"twostate", "three_boxes", "--abl", "A"});
  CHECK(a.code == 0);
  CHECK_THAT(a.out, ContainsSubstring("scenario three_boxes (two-state register)\n"));
  CHECK_THAT(a.out, ContainsSubstring("\nin A: 1.0\n"));
  CHECK_THAT(a.out, ContainsSubstring("\nnot in A: 0.0\n"));

  CmdResult c = run_cli({"twostate", "three_boxes", "--abl", "C",
                         "--format", "json"});
  CHECK(c.code == 0);
  json j = json::parse(c.out);
  const json& abl = j.at("twostate").at("abl");
  CHECK(abl.at("query").get<std::string>() == "C");
  CHECK(abl.at("outcomes")[0].get<std::string>() == "in C");
  CHECK(std::abs(abl.at("p")[0].get<double>() - 0.2) < 1e-12);
  CHECK(std::abs(abl.at("p")[1].get<double>() - 0.8) < 1e-12);
}

TEST_CASE("weak values of the box projectors") {
  CmdResult table = run_cli({"twostate", "three_boxes", "--weak", "PiC"});
  CHECK(table.code == 0);
  CHECK_THAT(table.out, ContainsSubstring("\nweak PiC: -1.0\n"));

  double sum = 0;
  for (const std::string op : {"PiA", "PiB", "PiC"}) {
    CmdResult r = run_cli(
        {"twostate", "three_boxes", "--weak", op, "--format", "json"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    const json& ts = j.at("twostate");
    CHECK(ts.at("subject").get<std::string>() == "register");
    REQUIRE(ts.at("stages").size() == 1);
    CHECK(ts.at("stages")[0].at("stage").get<int>() == 2);
    CHECK(std::abs(ts.at("stages")[0].at("overlap")[0].get<double>() -
                   1.0 / 3.0) < 1e-12);
    const json& value = ts.at("weak").at("value");
    double expected = op == "PiC" ? -1.0 : 1.0;
    CHECK(value[0].get<double>() == expected);
    CHECK(value[1].get<double>() == 0.0);
    sum += value[0].get<double>();
  }
  CHECK(sum == 1.0);
}

TEST_CASE("combined guidance cancels the untaken arm") {
  CmdResult r = run_cli(
      {"twostate", "single_mzi", "--post", "minus", "--combined-guidance"});
  CHECK(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("combined guidance (stage 1)\n"
                                      "  L 1.0\n"
                                      "  R 0.0\n"));
  CmdResult dashed = run_cli(
      {"twostate", "single_mzi", "--post", "-", "--combined-guidance"});
  CHECK(dashed.out == r.out);
}

TEST_CASE("two-state sequence on the crossed pair keeps a constant overlap") {
  CmdResult r = run_cli({"twostate", "crossed_mzi", "--post",
                         "+" + SEP + "-", "--format", "json"});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  const json& ts = j.at("twostate");
  CHECK(ts.at("subject").get<std::string>() == "chain");
  REQUIRE(ts.at("stages").size() == 4);
  for (const json& s : ts.at("stages")) {
    CHECK(std::abs(s.at("overlap")[0].get<double>() - 0.5) < 1e-12);
    CHECK(std::abs(s.at("overlap")[1].get<double>()) < 1e-12);
  }
}

TEST_CASE("CSV export lists labels in canonical order") {
  CmdResult r = run_cli({"run", "crossed_mzi", "--format", "csv"});
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> got;
  while (std::getline(lines, line)) got.push_back(line);
  REQUIRE(got.size() == 7);
  CHECK(got[0] == "label,probability");
  CHECK(got[1] == "+" + SEP + "+,0");
  CHECK_THAT(got[2], ContainsSubstring("+" + SEP + "-,0.5"));
  CHECK_THAT(got[3], ContainsSubstring("-" + SEP + "+,0.5"));
  CHECK(got[4] == "-" + SEP + "-,0");

  CmdResult single = run_cli({"run", "single_mzi", "--format", "csv"});
  std::istringstream single_lines(single.out);
  std::vector<std::string> rows;
  while (std::getline(single_lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "label,probability");
  CHECK(rows[1].rfind("+,", 0) == 0);
  CHECK(std::abs(std::stod(rows[1].substr(2)) - 1.0) < 1e-12);
  CHECK(rows[2] == "-,0");

  CmdResult refused = run_cli({"audit", "three_boxes", "--format", "csv"});
  CHECK(refused.code == 2);
}

TEST_CASE("seed precedence: flag over environment over default") {
  auto seed_of = [](const CmdResult& r) {
    return json::parse(r.out).at("ensemble").at("seed").get<long long>();
  };
  std::vector<std::string> base = {"run",   "three_boxes", "--sample",
                                   "200",   "--format",    "json"};
  CHECK(seed_of(run_cli(base)) == 1);
  CHECK(seed_of(run_cli(base, {{"PWL_SEED", "7"}})) == 7);

  std::vector<std::string> with_flag = base;
  with_flag.insert(with_flag.end(), {"--seed", "11"});
  CHECK(seed_of(run_cli(with_flag, {{"PWL_SEED", "7"}})) == 11);

  CmdResult bad = run_cli(base, {{"PWL_SEED", "zz"}});
  CHECK(bad.code == 2);
  CHECK_THAT(bad.err,
             ContainsSubstring("PWL_SEED is not an unsigned integer"));
}

TEST_CASE("--out writes exactly the stdout bytes") {
  char path[] = "/tmp/pwl_out_XXXXXX.json";
  int fd = mkstemps(path, 5);
  REQUIRE(fd >= 0);
  close(fd);
  CmdResult direct = run_cli({"run", "single_mzi", "--format", "json"});
  CmdResult filed =
      run_cli({"run", "single_mzi", "--format", "json", "--out", path});
  CHECK(filed.code == 0);
  CHECK(filed.out.empty());
  CHECK(slurp(path) == direct.out);
  unlink(path);
}

TEST_CASE("twostate input errors are reported cleanly") {
  CmdResult missing = run_cli({"twostate", "single_mzi"});
  CHECK(missing.code == 2);
  CHECK_THAT(missing.err, ContainsSubstring("needs --post"));

  CmdResult fixed = run_cli({"twostate", "three_boxes", "--post", "A"});
  CHECK(fixed.code == 2);
  CHECK_THAT(fixed.err, ContainsSubstring("costate filter"));

  CmdResult off = run_cli({"twostate", "single_mzi", "--post", "Q"});
  CHECK(off.code == 2);
  CHECK_THAT(off.err, ContainsSubstring("not on the final stage"));

  CmdResult op = run_cli({"twostate", "three_boxes", "--weak", "Foo"});
  CHECK(op.code == 2);
  CHECK_THAT(op.err, ContainsSubstring("use Pi<label>"));
}

TEST_CASE("variant plumbing rejects unknown names") {
  CmdResult bogus = run_cli({"run", "single_mzi", "--variant", "bogus"});
  CHECK(bogus.code == 2);
  CHECK_THAT(bogus.err, ContainsSubstring("has no variant"));

  std::string path = write_temp(serialize_experiment(build_single_mzi()));
  CmdResult file_variant = run_cli({"run", path, "--variant", "plain"});
  CHECK(file_variant.code == 2);
  CHECK_THAT(file_variant.err,
             ContainsSubstring("--variant applies to built-in scenarios"));
  unlink(path.c_str());
}

TEST_CASE("report JSON round-trips bitwise through an independent parser") {
  ExperimentSpec spec = build_three_boxes();
  ExactPropagation exact = propagate_exact(spec);
  RunReport report = make_run_report(spec, exact);
  json j = json::parse(report_json(report));

  REQUIRE(j.at("stages").size() == exact.stages.size());
  for (std::size_t k = 0; k < exact.stages.size(); ++k) {
    const StageExact& stage = exact.stages[k];
    const json& js = j.at("stages")[k];
    CHECK(js.at("wave_survival").get<double>() == stage.wave_survival);
    CHECK(js.at("particle_survival").get<double>() ==
          stage.particle_survival);
    for (std::size_t i = 0; i < stage.wave.amp.size(); ++i) {
      CHECK(js.at("wave")[i][0].get<double>() == stage.wave.amp[i].real());
      CHECK(js.at("wave")[i][1].get<double>() == stage.wave.amp[i].imag());
      CHECK(js.at("born")[i].get<double>() == stage.born.p[i]);
    }
  }
}

TEST_CASE("JSON string escaping survives an independent parser") {
  JsonWriter w;
  w.begin_object();
  w.key("plain " + SEP + " text");
  w.value(std::string("quote \" slash \\ tab \t nl \n ctl \x01 done"));
  w.key("numbers");
  w.begin_array();
  w.value(0.1 + 0.2);
  w.value(-1.0 / 3.0);
  w.value(std::int64_t{-42});
  w.end_array();
  w.end_object();

  json j = json::parse(w.text());
  CHECK(j.at("plain " + SEP + " text").get<std::string>() ==
        "quote \" slash \\ tab \t nl \n ctl \x01 done");
  CHECK(j.at("numbers")[0].get<double>() == 0.1 + 0.2);
  CHECK(j.at("numbers")[1].get<double>() == -1.0 / 3.0);
  CHECK(j.at("numbers")[2].get<std::int64_t>() == -42);
}

TEST_CASE("register boundary pair requires a product initial state") {
  TwoStateVector pair = register_boundary_pair(build_three_boxes());
  CHECK(pair.stage == 2);
  CHECK(std::abs(pair.overlap - complex{1.0 / 3.0, 0.0}) < 1e-12);
  for (const complex& a : pair.forward.amp)
    CHECK(std::abs(a - complex{1.0 / std::sqrt(3.0), 0.0}) < 1e-12);

  const double r2 = 1.0 / std::sqrt(2.0);
  ConfigSpace t0 = make_space(
      0, {"A" + SEP + "x", "A" + SEP + "y", "B" + SEP + "x", "B" + SEP + "y"});
  ConfigSpace t1 = make_space(1, {"x", "y"});
  ExperimentSpec spec;
  spec.name = "toy";
  spec.spaces = {t0, t1};
  spec.steps.push_back(
      make_costate_filter(t0, t1, {{"A", r2}, {"B", r2}}));

  spec.initial = make_wavefunction(
      t0, {{"A" + SEP + "x", r2}, {"B" + SEP + "y", r2}});
  CHECK_THROWS_WITH(register_boundary_pair(spec),
                    ContainsSubstring("does not factor"));

  spec.initial = make_wavefunction(t0, {{"A" + SEP + "x", 0.5},
                                        {"A" + SEP + "y", 0.5},
                                        {"B" + SEP + "x", 0.5},
                                        {"B" + SEP + "y", 0.5}});
  TwoStateVector toy = register_boundary_pair(spec);
  CHECK(std::abs(toy.overlap - complex{1.0, 0.0}) < 1e-12);
}
