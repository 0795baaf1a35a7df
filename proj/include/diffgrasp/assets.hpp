#pragma once

#include <cstdint>
#include <string>

#include "diffgrasp/hand.hpp"
#include "diffgrasp/mesh.hpp"

namespace dg {

// Procedural watertight meshes used by tests, the asset emitter and demos.
// All dimensions in meters, centered on the canonical origin.

TriMesh make_box(double sx, double sy, double sz);
TriMesh make_icosphere(double radius, int subdivisions);
TriMesh make_uv_sphere(double radius, int segments, int rings);
TriMesh make_cylinder(double radius, double height, int segments);
// Smoothly perturbed icosphere (EGAD-like blob); deterministic per seed.
TriMesh make_blob(double radius, int subdivisions, double amplitude, std::uint64_t seed);

// Three-finger Barrett-style test hand: box palm, three two-link fingers, two
// spread joints (8 DOF). The palm's +z axis is the approach direction.
HandModel make_three_finger_hand(int sample_budget = 2000, std::uint64_t sample_seed = 12345);
// Two-finger pincher (4 DOF), same conventions.
HandModel make_two_finger_hand(int sample_budget = 2000, std::uint64_t sample_seed = 12345);

// Writes the standard asset set (cube.obj, cylinder.obj, blob.obj, sphere.obj,
// barrett3.xml + link meshes, pincher2.xml + link meshes) into a directory.
void write_standard_assets(const std::string& dir);

}  // namespace dg
