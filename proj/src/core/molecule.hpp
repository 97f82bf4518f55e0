// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace mmt {

// Channel activation switch. TwoD uses only the bond graph, ThreeD only the
// coordinates, TwoDThreeD both.
enum class Mode { kTwoD, kThreeD, kTwoDThreeD };

const char* mode_name(Mode mode);
std::optional<Mode> mode_from_name(const std::string& name);

struct Bond {
  int i = 0;
  int j = 0;
  std::vector<int> features;
};

// The single input record shared by both channels. Atom features are opaque
// categorical indices; features[0] is the atom type. Bonds are undirected and
// stored canonically as (min, max).
struct Molecule {
  std::vector<std::vector<int>> atom_features;
  std::vector<Bond> bonds;
  std::optional<std::vector<Vec3>> coords;
  std::optional<double> target;

  int atom_count() const { return static_cast<int>(atom_features.size()); }
  bool has_bonds() const { return !bonds.empty(); }
  bool has_coords() const { return coords.has_value(); }

  // Sorts each bond's endpoints and the bond list itself; call after
  // constructing a molecule by hand.
  void canonicalize_bonds();
};

struct ModeSet {
  bool two_d = false;
  bool three_d = false;
  bool both = false;

  bool contains(Mode mode) const;
};

// Empty result means the molecule satisfies every invariant; otherwise the
// string describes the first violation.
std::optional<std::string> validate(const Molecule& m);
void validate_or_throw(const Molecule& m);

// Which modes the molecule's data supports. Throws a data error when neither
// bonds nor coordinates are present.
ModeSet available_modes(const Molecule& m);

std::vector<int> degrees(const Molecule& m);

// A training batch: per-instance mode assignments plus the padding geometry
// used when instances are run at a common atom count. Padded positions must
// contribute nothing to attention or loss.
struct Batch {
  std::vector<Molecule> molecules;
  std::vector<Mode> modes;
  int max_atoms = 0;

  static Batch of(std::vector<Molecule> molecules, std::vector<Mode> modes);
  bool is_padding(int instance, int atom) const;
};

}  // namespace mmt
