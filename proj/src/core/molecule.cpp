// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0

#include "core/molecule.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace mmt {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kTwoD: return "2d";
    case Mode::kThreeD: return "3d";
    case Mode::kTwoDThreeD: return "2d3d";
  }
  return "?";
}

std::optional<Mode> mode_from_name(const std::string& name) {
  if (name == "2d") return Mode::kTwoD;
  if (name == "3d") return Mode::kThreeD;
  if (name == "2d3d") return Mode::kTwoDThreeD;
  return std::nullopt;
}

void Molecule::canonicalize_bonds() {
  for (auto& b : bonds) {
    if (b.i > b.j) std::swap(b.i, b.j);
  }
  std::sort(bonds.begin(), bonds.end(), [](const Bond& a, const Bond& b) {
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
}

bool ModeSet::contains(Mode mode) const {
  switch (mode) {
    case Mode::kTwoD: return two_d;
    case Mode::kThreeD: return three_d;
    case Mode::kTwoDThreeD: return both;
  }
  return false;
}

std::optional<std::string> validate(const Molecule& m) {
  const int n = m.atom_count();
  if (n < 1) return "molecule has no atoms";
  for (int a = 0; a < n; ++a) {
    if (m.atom_features[a].empty()) return "atom " + std::to_string(a) + " has no features";
    for (int f : m.atom_features[a]) {
      if (f < 0) return "atom " + std::to_string(a) + " has a negative feature index";
    }
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& b : m.bonds) {
    if (b.i < 0 || b.i >= n || b.j < 0 || b.j >= n)
      return "bond (" + std::to_string(b.i) + "," + std::to_string(b.j) +
             ") references an atom out of range";
    if (b.i == b.j) return "bond (" + std::to_string(b.i) + "," + std::to_string(b.j) +
                           ") is a self-loop";
    const auto key = std::minmax(b.i, b.j);
    if (!seen.insert(key).second)
      return "duplicate bond (" + std::to_string(key.first) + "," +
             std::to_string(key.second) + ")";
    for (int f : b.features) {
      if (f < 0) return "bond feature index is negative";
    }
  }
  if (m.coords && static_cast<int>(m.coords->size()) != n)
    return "coords length " + std::to_string(m.coords->size()) +
           " does not match atom count " + std::to_string(n);
  return std::nullopt;
}

void validate_or_throw(const Molecule& m) {
  if (auto err = validate(m)) fail(ErrorCode::kData, *err);
}

ModeSet available_modes(const Molecule& m) {
  ModeSet set;
  const bool has_2d = m.has_bonds();
  const bool has_3d = m.has_coords();
  if (!has_2d && !has_3d)
    fail(ErrorCode::kData, "molecule has neither bonds nor coordinates");
  if (has_2d) set.two_d = true;
  if (has_3d) set.three_d = true;
  if (has_2d && has_3d) set.both = true;
  return set;
}

std::vector<int> degrees(const Molecule& m) {
  std::vector<int> deg(m.atom_count(), 0);
  for (const auto& b : m.bonds) {
    ++deg[b.i];
    ++deg[b.j];
  }
  return deg;
}

Batch Batch::of(std::vector<Molecule> molecules, std::vector<Mode> modes) {
  if (molecules.size() != modes.size())
    fail(ErrorCode::kInvalidArgument, "batch: one mode per molecule required");
  Batch b;
  b.molecules = std::move(molecules);
  b.modes = std::move(modes);
  for (const auto& m : b.molecules) b.max_atoms = std::max(b.max_atoms, m.atom_count());
  return b;
}

bool Batch::is_padding(int instance, int atom) const {
  return atom >= molecules[instance].atom_count();
}

}  // namespace mmt
