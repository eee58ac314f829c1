#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slabforge/coupling.hpp"
#include "slabforge/extrude.hpp"
#include "slabforge/mesh.hpp"

namespace slabforge {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

// ---- native mesh format (STMESH 1) ----

std::string serialize_mesh(const SpatialMesh& mesh);
SpatialMesh parse_mesh(const std::string& text);
void write_mesh_file(const SpatialMesh& mesh, const std::string& path);
SpatialMesh read_mesh_file(const std::string& path);

// ---- native slab format (STSLAB 1) ----

std::string serialize_slab(const SpaceTimeSlab& slab);
SpaceTimeSlab parse_slab(const std::string& text);
void write_slab_file(const SpaceTimeSlab& slab, const std::string& path);
SpaceTimeSlab read_slab_file(const std::string& path);

// ---- VTK legacy ASCII export (unstructured grid, tetrahedra) ----

/// Points are (x, y, t); cells carry `region` and `cell_id` integer scalars.
/// Refuses to serialize a slab with no tetrahedra.
std::string serialize_slab_vtk(const SpaceTimeSlab& slab);
/// Minimal reader for exactly the subset serialize_slab_vtk emits, so the
/// write -> read -> write determinism check is an honest round trip. The
/// global id base is not stored in VTK; the reparsed slab starts ids at 0.
SpaceTimeSlab parse_slab_vtk(const std::string& text);
void write_slab_vtk(const SpaceTimeSlab& slab, const std::string& path);
SpaceTimeSlab read_slab_vtk(const std::string& path);

// ---- time-series CSV ----

std::string time_series_header();
std::string time_series_row(const StepRecord& record);
void write_time_series(const std::vector<StepRecord>& records, const std::string& path);

// ---- run configuration ----

struct MeshSpec {
  enum class Kind { AnnulusDisk, BoxRing };
  Kind kind = Kind::AnnulusDisk;
  Vec2 center{0.0, 0.0};
  // annulus_disk
  double r_rotating = 0.5;
  double r_mid = 0.75;
  double r_outer = 1.0;
  double r_static = 0.0;  // <= r_outer omits the static ring
  std::int64_t n_quads = 32;
  // box_ring
  double body_half = 0.5;
  double domain_half = 4.0;
  std::int64_t n_side = 4;
  std::int64_t n_layers = 4;

  SpatialMesh build() const;
};

struct ProviderSpec {
  std::string kind = "zero";  // zero|constant|sine|linear|quasi_steady|pressure_field
  // constant
  double fx = 0.0, fy = 0.0, moment = 0.0;
  // sine
  double amplitude_fy = 0.0, amplitude_m = 0.0, omega = 1.0;
  // linear
  double k_d = 0.0, k_ddot = 0.0, k_theta = 0.0, k_thetadot = 0.0;
  // quasi_steady
  QuasiSteadyTable table;
  double qs_rho = 1.0, u_ref = 1.0, body_height = 1.0;
  // pressure_field
  double c0 = 0.0, cx = 0.0, cy = 0.0;
  SymTensor2 eps;
  int gauss_points = 3;

  std::unique_ptr<ForceProvider> build(const FluidParams& fluid) const;
};

/// Everything the `simulate` command needs, parsed from one config file.
struct RunSpec {
  CouplingConfig coupling;
  MeshSpec mesh;
  ProviderSpec provider;
};

/// Strict sectioned key = value parser: unknown sections or keys, repeated
/// keys, and ill-typed values are errors carrying the line number. Defaults
/// are recorded in the returned spec (delta_rb = 1e-5 unless overridden).
RunSpec parse_run_config(const std::string& text);
RunSpec read_run_config_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace slabforge
