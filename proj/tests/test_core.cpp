#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "pwl/core.hpp"

using namespace pwl;

namespace {
const double R2 = 1.0 / std::sqrt(2.0);
const double R3 = 1.0 / std::sqrt(3.0);
const double R6 = 1.0 / std::sqrt(6.0);
}  // namespace

TEST_CASE("spaces keep labels in canonical order") {
  auto s = make_space(0, {"R", "L"});
  REQUIRE(s.labels == std::vector<std::string>{"L", "R"});
  REQUIRE(s.index_of("R") == 1);
  REQUIRE(s.index_of("missing") == -1);

  SECTION("declared order is preserved") {
    auto d = make_space(0, {"R", "L"}, true);
    REQUIRE(d.labels == std::vector<std::string>{"R", "L"});
  }
  SECTION("plus sorts before minus") {
    auto d = make_space(0, {"--", "-+", "+-", "++"});
    REQUIRE(d.labels == std::vector<std::string>{"++", "+-", "-+", "--"});
  }
  SECTION("invalid spaces are rejected") {
    REQUIRE_THROWS_AS(make_space(0, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(make_space(0, {"a", "a"}), std::invalid_argument);
    REQUIRE_THROWS_AS(make_space(0, {""}), std::invalid_argument);
    REQUIRE_THROWS_AS(make_space(-1, {"a"}), std::invalid_argument);
  }
}

TEST_CASE("product labels split and join around the tensor separator") {
  std::string joined = join_factors({"A", "a", "R"});
  auto parts = split_factors(joined);
  REQUIRE(parts == std::vector<std::string>{"A", "a", "R"});
  REQUIRE(split_factors("Tt") == std::vector<std::string>{"Tt"});
}

TEST_CASE("wave functions are zero-filled and normalized") {
  auto s = make_space(0, {"+", "-"});
  auto psi = make_wavefunction(s, {{"+", 1.0}});
  REQUIRE(psi.amp[0] == complex{1, 0});
  REQUIRE(psi.amp[1] == complex{0, 0});
  REQUIRE(psi.norm2() == Catch::Approx(1.0).margin(1e-12));

  SECTION("unnormalized input is scaled") {
    auto p = make_wavefunction(s, {{"+", 3.0}, {"-", 4.0}});
    REQUIRE(std::abs(p.at("+") - 0.6) < 1e-12);
    REQUIRE(std::abs(p.at("-") - 0.8) < 1e-12);
  }
  SECTION("unknown labels and the zero vector are rejected") {
    REQUIRE_THROWS_AS(make_wavefunction(s, {{"x", 1.0}}),
                      std::invalid_argument);
    REQUIRE_THROWS_WITH(make_wavefunction(s, {{"+", 0.0}}),
                        "zero-norm wave function");
  }
}

TEST_CASE("beam-splitter step acts as expected") {
  auto t0 = make_space(0, {"+", "-"});
  auto t1 = make_space(1, {"L", "R"});
  auto bs = make_step_from_columns(StepKind::unitary, t0, t1,
                                   {{"+", {{R2, "L"}, {R2, "R"}}},
                                    {"-", {{R2, "L"}, {-R2, "R"}}}});
  auto psi = make_wavefunction(t0, {{"+", 1.0}});
  auto out = apply_step(bs, psi);
  REQUIRE(std::abs(out.at("L") - R2) < 1e-12);
  REQUIRE(std::abs(out.at("R") - R2) < 1e-12);
  REQUIRE(out.norm2() == Catch::Approx(1.0).margin(1e-12));

  SECTION("space mismatch is rejected") {
    auto other = make_wavefunction(t1, {{"L", 1.0}});
    REQUIRE_THROWS_AS(apply_step(bs, other), std::invalid_argument);
  }
}

TEST_CASE("step validation rejects non-isometries") {
  auto t0 = make_space(0, {"+", "-"});
  auto t1 = make_space(1, {"L", "R"});
  SECTION("short column") {
    REQUIRE_THROWS_WITH(
        make_step_from_columns(StepKind::unitary, t0, t1,
                               {{"+", {{0.6, "L"}, {0.6, "R"}}},
                                {"-", {{R2, "L"}, {-R2, "R"}}}}),
        "step not an isometry (column norm 0.72)");
  }
  SECTION("non-orthogonal columns") {
    REQUIRE_THROWS_AS(
        make_step_from_columns(StepKind::unitary, t0, t1,
                               {{"+", {{R2, "L"}, {R2, "R"}}},
                                {"-", {{R2, "L"}, {R2, "R"}}}}),
        std::invalid_argument);
  }
  SECTION("missing column") {
    REQUIRE_THROWS_AS(
        make_step_from_columns(StepKind::unitary, t0, t1,
                               {{"+", {{R2, "L"}, {R2, "R"}}}}),
        std::invalid_argument);
  }
  SECTION("dimension may grow but not shrink") {
    auto wide = make_space(1, {"a", "b", "c"});
    REQUIRE_NOTHROW(make_step_from_columns(
        StepKind::isometry, t0, wide,
        {{"+", {{1.0, "a"}}}, {"-", {{1.0, "b"}}}}));
    auto narrow = make_space(1, {"a"});
    REQUIRE_THROWS_AS(make_step_from_columns(StepKind::isometry, t0, narrow,
                                             {{"+", {{1.0, "a"}}},
                                              {"-", {{1.0, "a"}}}}),
                      std::invalid_argument);
  }
}

TEST_CASE("tensor builds product labels with multiplied amplitudes") {
  auto a = make_space(0, {"L", "R"});
  auto b = make_space(0, {"l", "r"});
  auto x = make_wavefunction(a, {{"L", R2}, {"R", R2}});
  auto y = make_wavefunction(b, {{"l", R2}, {"r", -R2}});
  auto xy = tensor(x, y);
  REQUIRE(xy.space.dim() == 4);
  std::string key = std::string("L") + kTensorSep + "r";
  REQUIRE(std::abs(xy.at(key) - (-0.5)) < 1e-12);
  REQUIRE(xy.norm2() == Catch::Approx(1.0).margin(1e-12));

  SECTION("stage mismatch is rejected") {
    auto c = make_space(1, {"l", "r"});
    auto z = make_wavefunction(c, {{"l", 1.0}});
    REQUIRE_THROWS_AS(tensor(x, z), std::invalid_argument);
  }
}

TEST_CASE("keep-filter projection conditions and records survival") {
  auto s = make_space(3, {"++", "+-", "-+", "--", "Bb", "Tt"});
  auto filter = make_keep_filter(s, {"++", "+-", "-+", "--"});
  auto psi = make_wavefunction(
      s, {{"Tt", 0.5}, {"Bb", 0.5}, {"+-", 0.5}, {"-+", 0.5}});
  auto proj = project(filter, psi);
  REQUIRE(proj.survival == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(proj.conditional.has_value());
  REQUIRE(std::abs(proj.conditional->at("+-") - R2) < 1e-12);
  REQUIRE(std::abs(proj.conditional->at("-+") - R2) < 1e-12);
  REQUIRE(std::abs(proj.conditional->at("Tt")) < 1e-12);

  SECTION("zero survival gives an explicit empty marker") {
    auto dead = make_wavefunction(s, {{"Tt", R2}, {"Bb", R2}});
    auto p = project(filter, dead);
    REQUIRE(p.survival == 0.0);
    REQUIRE_FALSE(p.conditional.has_value());
  }
  SECTION("unknown keep label is rejected") {
    REQUIRE_THROWS_AS(make_keep_filter(s, {"nope"}), std::invalid_argument);
  }
}

TEST_CASE("costate filter contracts the first factor") {
  // Joint labels atom⊗path⊗window; the costate pairs against the atom.
  std::vector<std::string> joint;
  for (std::string atom : {"A", "B", "C"})
    for (std::string path : {"a", "b"})
      for (std::string w : {"R", "T"})
        joint.push_back(atom + kTensorSep + path + kTensorSep + w);
  auto t2 = make_space(2, joint);
  auto t3 = make_space(3, {std::string("a") + kTensorSep + "R",
                           std::string("a") + kTensorSep + "T",
                           std::string("b") + kTensorSep + "R",
                           std::string("b") + kTensorSep + "T"});
  auto f = make_costate_filter(t2, t3, {{"A", R3}, {"B", R3}, {"C", -R3}});

  // The state the boxes produce: reflected only where atom and photon meet.
  auto psi = make_wavefunction(
      t2, {{join_factors({"A", "a", "R"}), R6},
           {join_factors({"A", "b", "T"}), R6},
           {join_factors({"B", "a", "T"}), R6},
           {join_factors({"B", "b", "R"}), R6},
           {join_factors({"C", "a", "T"}), R6},
           {join_factors({"C", "b", "T"}), R6}});
  auto proj = project(f, psi);
  REQUIRE(proj.survival == Catch::Approx(1.0 / 9.0).margin(1e-12));
  REQUIRE(proj.conditional.has_value());
  REQUIRE(std::abs(proj.conditional->at(join_factors({"a", "R"})) - R2) <
          1e-12);
  REQUIRE(std::abs(proj.conditional->at(join_factors({"b", "R"})) - R2) <
          1e-12);
  REQUIRE(std::abs(proj.conditional->at(join_factors({"a", "T"}))) < 1e-12);
  REQUIRE(std::abs(proj.conditional->at(join_factors({"b", "T"}))) < 1e-12);

  SECTION("unnormalized costates are rejected") {
    REQUIRE_THROWS_AS(make_costate_filter(t2, t3, {{"A", 1.0}, {"B", 1.0}}),
                      std::invalid_argument);
  }
  SECTION("non-product source labels are rejected") {
    auto flat = make_space(2, {"x", "y"});
    auto out = make_space(3, {"z"});
    REQUIRE_THROWS_AS(make_costate_filter(flat, out, {{"x", 1.0}}),
                      std::invalid_argument);
  }
}

TEST_CASE("real-wave detection quotients out one global phase") {
  auto s = make_space(0, {"L", "R"});
  auto psi = make_wavefunction(s, {{"L", R2}, {"R", -R2}});
  REQUIRE(is_real_wave(psi));

  SECTION("a global phase does not matter") {
    complex phase = std::polar(1.0, 0.7);
    auto rotated = psi;
    for (auto& a : rotated.amp) a *= phase;
    REQUIRE(is_real_wave(rotated));
  }
  SECTION("genuinely complex waves are detected") {
    auto mixed = make_wavefunction(s, {{"L", R2}, {"R", complex{0, R2}}});
    REQUIRE_FALSE(is_real_wave(mixed));
  }
}
