// Built-in interferometer and box-register experiments, each carrying both
// a tabulated particle-transfer strategy and everything the flow-derived
// policy needs, plus optional named locality masks for auditing.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pwl/core.hpp"
#include "pwl/ensemble.hpp"
#include "pwl/guidance.hpp"

namespace pwl {

namespace detail {

inline const double kR2 = 1.0 / std::sqrt(2.0);
inline const double kR3 = 1.0 / std::sqrt(3.0);
inline const double kR6 = 1.0 / std::sqrt(6.0);

inline TransferMatrix table_from_columns(
    const ConfigSpace& from, const ConfigSpace& to,
    const std::vector<std::pair<std::string,
                                std::vector<std::pair<double, std::string>>>>&
        columns) {
  TransferMatrix t;
  t.from = from;
  t.to = to;
  t.p.assign(to.dim(), std::vector<double>(from.dim(), 0.0));
  t.source_support.assign(from.dim(), 1);
  for (const auto& [in, terms] : columns) {
    int j = from.index_of(in);
    if (j < 0) throw std::invalid_argument("table column for unknown label");
    for (const auto& [w, out] : terms) {
      int i = to.index_of(out);
      if (i < 0) throw std::invalid_argument("table maps to unknown label");
      t.p[i][j] += w;
    }
  }
  return t;
}

inline SupportMask mask_from_pairs(
    const ConfigSpace& from, const ConfigSpace& to, std::string description,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  SupportMask m;
  m.from = from;
  m.to = to;
  m.description = std::move(description);
  m.allow.assign(to.dim(), std::vector<char>(from.dim(), 0));
  for (const auto& [in, out] : pairs) {
    int j = from.index_of(in), i = to.index_of(out);
    if (i < 0 || j < 0)
      throw std::invalid_argument("mask pair on unknown label");
    m.allow[i][j] = 1;
  }
  return m;
}

}  // namespace detail

// One particle through a balanced interferometer: both splitters are the
// same Hadamard-convention plate, so the bright output port is '+'.
inline ExperimentSpec build_single_mzi() {
  using detail::kR2;
  ConfigSpace t0 = make_space(0, {"+", "-"});
  ConfigSpace t1 = make_space(1, {"L", "R"});
  ConfigSpace t2 = make_space(2, {"+", "-"});

  ExperimentSpec spec;
  spec.name = "single_mzi";
  spec.spaces = {t0, t1, t2};
  spec.steps.push_back(make_step_from_columns(
      StepKind::unitary, t0, t1,
      {{"+", {{kR2, "L"}, {kR2, "R"}}}, {"-", {{kR2, "L"}, {-kR2, "R"}}}}));
  spec.steps.push_back(make_step_from_columns(
      StepKind::unitary, t1, t2,
      {{"L", {{kR2, "+"}, {kR2, "-"}}}, {"R", {{kR2, "+"}, {-kR2, "-"}}}}));
  spec.initial = make_wavefunction(t0, {{"+", 1.0}});
  spec.tables[0] = detail::table_from_columns(
      t0, t1, {{"+", {{0.5, "L"}, {0.5, "R"}}}, {"-", {{0.5, "L"}, {0.5, "R"}}}});
  spec.tables[1] = detail::table_from_columns(
      t1, t2, {{"L", {{1.0, "+"}}}, {"R", {{1.0, "+"}}}});
  return spec;
}

// Electron and positron interferometers whose inner arms cross: the (L,l)
// pair diverts to (B,b) and (R,r) to (T,t), leaving the anti-correlated
// sign outputs after the final splitters and postselection.
inline ExperimentSpec build_crossed_mzi(const std::string& variant = "plain") {
  using detail::kR2;
  if (variant != "plain" && variant != "obstacle_after_crossing" &&
      variant != "localized_blocker")
    throw std::invalid_argument("unknown crossed interferometer variant '" +
                                variant + "'");
  const std::string sep = kTensorSep;
  auto pair = [&](const std::string& a, const std::string& b) {
    return a + sep + b;
  };
  ConfigSpace t0 = make_space(
      0, {pair("+", "+"), pair("+", "-"), pair("-", "+"), pair("-", "-")});
  ConfigSpace t1 = make_space(
      1, {pair("L", "l"), pair("L", "r"), pair("R", "l"), pair("R", "r")});
  ConfigSpace t2 = make_space(
      2, {pair("B", "b"), pair("L", "r"), pair("R", "l"), pair("T", "t")});
  ConfigSpace t3 =
      make_space(3, {pair("+", "+"), pair("+", "-"), pair("-", "+"),
                     pair("-", "-"), pair("B", "b"), pair("T", "t")});

  ExperimentSpec spec;
  spec.name = "crossed_mzi";
  spec.spaces = {t0, t1, t2, t3};

  // Entry splitters act on each particle at once; the positron plate is
  // the electron plate mirrored, which is what makes the recombined pair
  // land on the anti-correlated sign outputs.
  ColumnSpec enter;
  for (const std::string e : {"+", "-"})
    for (const std::string p : {"+", "-"}) {
      double se = (e == "-") ? -1.0 : 1.0, sp = (p == "-") ? -1.0 : 1.0;
      enter.push_back({pair(e, p),
                       {{kR2 * kR2, pair("L", "l")},
                        {kR2 * kR2 * sp, pair("L", "r")},
                        {kR2 * kR2 * se, pair("R", "l")},
                        {kR2 * kR2 * se * sp, pair("R", "r")}}});
    }
  spec.steps.push_back(make_step_from_columns(StepKind::unitary, t0, t1, enter));
  spec.steps.push_back(make_step_from_columns(
      StepKind::unitary, t1, t2,
      {{pair("L", "l"), {{1.0, pair("B", "b")}}},
       {pair("L", "r"), {{1.0, pair("L", "r")}}},
       {pair("R", "l"), {{1.0, pair("R", "l")}}},
       {pair("R", "r"), {{1.0, pair("T", "t")}}}}));
  spec.steps.push_back(make_step_from_columns(
      StepKind::isometry, t2, t3,
      {{pair("B", "b"), {{1.0, pair("B", "b")}}},
       {pair("T", "t"), {{1.0, pair("T", "t")}}},
       // L -> (+,-)/sqrt2, r -> (+,-)/sqrt2 on the mirrored plate
       {pair("L", "r"),
        {{0.5, pair("+", "+")},
         {0.5, pair("+", "-")},
         {0.5, pair("-", "+")},
         {0.5, pair("-", "-")}}},
       {pair("R", "l"),
        {{-0.5, pair("+", "+")},
         {0.5, pair("+", "-")},
         {0.5, pair("-", "+")},
         {-0.5, pair("-", "-")}}}}));
  spec.initial = make_wavefunction(t0, {{pair("+", "+"), 1.0}});
  spec.keep_filters[3] = make_keep_filter(
      t3, {pair("+", "+"), pair("+", "-"), pair("-", "+"), pair("-", "-")});
  if (variant == "obstacle_after_crossing")
    spec.keep_filters[2] =
        make_keep_filter(t2, {pair("B", "b"), pair("R", "l"), pair("T", "t")});
  if (variant == "localized_blocker")
    spec.keep_filters[1] = make_keep_filter(t1, {pair("R", "l"), pair("R", "r")});

  std::vector<std::pair<std::string, std::vector<std::pair<double, std::string>>>>
      spread;
  for (const auto& in : t0.labels)
    spread.push_back({in,
                      {{0.25, pair("L", "l")},
                       {0.25, pair("L", "r")},
                       {0.25, pair("R", "l")},
                       {0.25, pair("R", "r")}}});
  spec.tables[0] = detail::table_from_columns(t0, t1, spread);
  spec.tables[1] = detail::table_from_columns(
      t1, t2,
      {{pair("L", "l"), {{1.0, pair("B", "b")}}},
       {pair("L", "r"), {{1.0, pair("L", "r")}}},
       {pair("R", "l"), {{1.0, pair("R", "l")}}},
       {pair("R", "r"), {{1.0, pair("T", "t")}}}});
  bool obstructed = variant != "plain";
  auto inner_column = [&](const std::string& in) {
    std::pair<std::string, std::vector<std::pair<double, std::string>>> col;
    col.first = in;
    if (obstructed)  // no partner beam, so no interference at the plates
      col.second = {{0.25, pair("+", "+")},
                    {0.25, pair("+", "-")},
                    {0.25, pair("-", "+")},
                    {0.25, pair("-", "-")}};
    else
      col.second = {{0.5, pair("+", "-")}, {0.5, pair("-", "+")}};
    return col;
  };
  spec.tables[2] = detail::table_from_columns(
      t2, t3,
      {{pair("B", "b"), {{1.0, pair("B", "b")}}},
       {pair("T", "t"), {{1.0, pair("T", "t")}}},
       inner_column(pair("L", "r")),
       inner_column(pair("R", "l"))});
  return spec;
}

// An atom hidden in one of three boxes and a photon that can take two
// paths past two of them; reflection marks the photon's window label.
// The run ends by projecting the atom onto the balanced costate with the
// C arm flipped, which leaves the photon reflected on both paths.
inline ExperimentSpec build_three_boxes() {
  using detail::kR3;
  using detail::kR6;
  const std::string sep = kTensorSep;
  std::vector<std::string> atoms = {"A", "B", "C"}, paths = {"a", "b"};
  auto box_of = [](const std::string& path) {
    return path == "a" ? std::string("A") : std::string("B");
  };
  auto window_at = [&](const std::string& atom, const std::string& path) {
    return atom == box_of(path) ? std::string("R") : std::string("T");
  };

  std::vector<std::string> reg2, reg3, photon;
  for (const auto& I : atoms)
    for (const auto& x : paths) {
      reg2.push_back(I + sep + x);
      for (const std::string W : {"R", "T"})
        reg3.push_back(I + sep + x + sep + W);
    }
  for (const auto& x : paths)
    for (const std::string W : {"R", "T"}) photon.push_back(x + sep + W);

  ConfigSpace t0 = make_space(0, reg2);
  ConfigSpace t1 = make_space(1, reg2);
  ConfigSpace t2 = make_space(2, reg3);
  ConfigSpace t3 = make_space(3, photon);

  ExperimentSpec spec;
  spec.name = "three_boxes";
  spec.spaces = {t0, t1, t2, t3};

  ColumnSpec settle, touch;
  std::vector<std::pair<std::string, complex>> start;
  std::vector<std::pair<std::string, std::vector<std::pair<double, std::string>>>>
      settle_t, touch_t, project_t;
  std::vector<std::pair<std::string, std::string>> touch_pairs, project_pairs;
  for (const auto& I : atoms)
    for (const auto& x : paths) {
      std::string in = I + sep + x;
      std::string out = I + sep + x + sep + window_at(I, x);
      settle.push_back({in, {{1.0, in}}});
      touch.push_back({in, {{1.0, out}}});
      settle_t.push_back({in, {{1.0, in}}});
      touch_t.push_back({in, {{1.0, out}}});
      touch_pairs.push_back({in, out});
      start.push_back({in, kR6});
      for (const std::string W : {"R", "T"}) {
        std::string full = I + sep + x + sep + W;
        std::string tail = x + sep + W;
        // The local surrogate: each run survives the atom projection with
        // the atom's own overlap probability and the photon stays put.
        project_t.push_back({full, {{kR3 * kR3, tail}}});
        project_pairs.push_back({full, tail});
        if (I == box_of(x))
          project_pairs.push_back(
              {full, x + sep + (W == "R" ? std::string("T") : std::string("R"))});
      }
    }
  spec.steps.push_back(make_step_from_columns(StepKind::unitary, t0, t1, settle));
  spec.steps.push_back(make_step_from_columns(StepKind::isometry, t1, t2, touch));
  spec.steps.push_back(make_costate_filter(
      t2, t3, {{"A", kR3}, {"B", kR3}, {"C", -kR3}}));
  spec.initial = make_wavefunction(t0, start);
  spec.tables[0] = detail::table_from_columns(t0, t1, settle_t);
  spec.tables[1] = detail::table_from_columns(t1, t2, touch_t);
  spec.tables[2] = detail::table_from_columns(t2, t3, project_t);
  spec.masks[1] = detail::mask_from_pairs(
      t1, t2, "photon window set only by the box it passes", touch_pairs);
  spec.masks[2] = detail::mask_from_pairs(
      t2, t3, "photon window may change only where the atom sits",
      project_pairs);
  return spec;
}

inline ExperimentSpec build_scenario(const std::string& name,
                                     const std::string& variant = "") {
  if (name == "single_mzi") {
    if (!variant.empty() && variant != "plain")
      throw std::invalid_argument("experiment 'single_mzi' has no variant '" +
                                  variant + "'");
    return build_single_mzi();
  }
  if (name == "crossed_mzi")
    return build_crossed_mzi(variant.empty() ? "plain" : variant);
  if (name == "three_boxes") {
    if (!variant.empty() && variant != "plain")
      throw std::invalid_argument("experiment 'three_boxes' has no variant '" +
                                  variant + "'");
    return build_three_boxes();
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

// Straight-line geometry at the exit plates: reflection is forbidden, so
// each arm feeds exactly one output port.
inline void attach_named_mask(ExperimentSpec& spec, const std::string& name) {
  const std::string sep = kTensorSep;
  auto pair = [&](const std::string& a, const std::string& b) {
    return a + sep + b;
  };
  if (spec.name == "single_mzi" && name == "straight") {
    spec.masks[1] = detail::mask_from_pairs(
        spec.spaces[1], spec.spaces[2], "straight-through exit plate",
        {{"L", "-"}, {"R", "+"}});
    return;
  }
  if (spec.name == "crossed_mzi" && name == "straight") {
    spec.masks[2] = detail::mask_from_pairs(
        spec.spaces[2], spec.spaces[3], "straight-through exit plates",
        {{pair("B", "b"), pair("B", "b")},
         {pair("T", "t"), pair("T", "t")},
         {pair("L", "r"), pair("-", "+")},
         {pair("R", "l"), pair("+", "-")}});
    return;
  }
  if (spec.name == "three_boxes" && name == "locality") return;  // built in
  throw std::invalid_argument("unknown mask '" + name + "' for experiment '" +
                              spec.name + "'");
}

}  // namespace pwl
