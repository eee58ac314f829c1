#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "slabforge/coupling.hpp"
#include "slabforge/error.hpp"
#include "slabforge/extrude.hpp"
#include "slabforge/io.hpp"
#include "slabforge/log.hpp"
#include "slabforge/mesh.hpp"
#include "slabforge/sliding.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

int run_generate(const std::string& config_path, const std::string& out_path) {
  const slabforge::RunSpec spec = slabforge::read_run_config_file(config_path);
  const slabforge::SpatialMesh mesh = spec.mesh.build();
  const slabforge::ValidationReport report = slabforge::validate_spatial_mesh(mesh);
  if (!report.ok()) {
    std::cerr << "generated mesh failed validation:\n" << report.to_string();
    return kExitValidation;
  }
  slabforge::write_mesh_file(mesh, out_path);
  std::cout << "wrote " << out_path << " (" << mesh.vertex_count() << " vertices, "
            << mesh.triangles.size() << " triangles, " << mesh.quads.size() << " quads)\n";
  return kExitOk;
}

int run_extrude(const std::string& mesh_path, const std::string& next_path, bool swap_flag,
                double t0, double t1, const std::string& out_path) {
  const slabforge::SpatialMesh bottom = slabforge::read_mesh_file(mesh_path);
  slabforge::SpatialMesh top = slabforge::read_mesh_file(next_path);
  // Slab ids are defined by the bottom snapshot; renumber the top level to
  // follow it regardless of what offset the file was saved with.
  top.id_offset = bottom.id_offset + static_cast<std::int64_t>(bottom.vertex_count());

  slabforge::SwapDecision decision;
  std::int64_t delta = 0;
  if (bottom.annulus && top.annulus) {
    delta = top.annulus->sliding_shift - bottom.annulus->sliding_shift;
  }
  if (delta != 0 && std::abs(delta) != 1) {
    std::cerr << "mesh pair differs by " << delta << " sliding shifts; one slab swaps at most 1\n";
    return kExitUsage;
  }
  if ((delta != 0) != swap_flag) {
    std::cerr << (delta != 0 ? "mesh pair implies a swap; pass --swap\n"
                             : "--swap given but both meshes have the same sliding shift\n");
    return kExitUsage;
  }
  if (delta != 0) {
    decision.swap = true;
    decision.shift_delta = delta;
    decision.direction = bottom.annulus->sliding_shift % 2 == 0
                             ? slabforge::SwapDirection::PrimaryToSecondary
                             : slabforge::SwapDirection::SecondaryToPrimary;
  }

  slabforge::ExtrudeStats stats;
  const slabforge::SpaceTimeSlab slab =
      slabforge::extrude_slab(bottom, top, decision, t0, t1, nullptr, &stats);
  const slabforge::ConformityReport report = slabforge::validate_slab(slab, &bottom, &top);
  if (!report.ok()) {
    std::cerr << "extruded slab failed validation:\n" << report.to_string();
    return kExitValidation;
  }
  slabforge::write_slab_file(slab, out_path);
  std::cout << "wrote " << out_path << " (" << slab.tets.size() << " tets, " << stats.prisms
            << " prisms, " << stats.blocks << " blocks)\n";
  return kExitOk;
}

int run_validate(const std::string& path) {
  const std::string text = slabforge::read_text_file(path);
  std::string issues;
  if (text.rfind("STMESH", 0) == 0) {
    const slabforge::SpatialMesh mesh = slabforge::parse_mesh(text);
    issues = slabforge::validate_spatial_mesh(mesh).to_string();
  } else if (text.rfind("STSLAB", 0) == 0) {
    const slabforge::SpaceTimeSlab slab = slabforge::parse_slab(text);
    issues = slabforge::validate_slab(slab).to_string();
  } else {
    std::cerr << path << ": unrecognized file header (expected STMESH or STSLAB)\n";
    return kExitUsage;
  }
  if (!issues.empty()) {
    std::cout << issues;
    std::cout << path << ": INVALID\n";
    return kExitValidation;
  }
  std::cout << path << ": OK\n";
  return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& out_dir, bool vtk) {
  const slabforge::RunSpec spec = slabforge::read_run_config_file(config_path);
  std::filesystem::create_directories(out_dir);

  slabforge::Simulation sim(spec.mesh.build(), spec.coupling,
                            spec.provider.build(spec.coupling.fluid));
  std::int64_t swaps = 0;
  const std::vector<slabforge::StepRecord> records = slabforge::run_simulation(
      sim, -1, [&](const slabforge::StepRecord& rec, const slabforge::Simulation& s) {
        if (rec.swapped) ++swaps;
        if (vtk) {
          char name[32];
          std::snprintf(name, sizeof(name), "slab_%06lld.vtk",
                        static_cast<long long>(rec.index));
          slabforge::write_slab_vtk(s.last_slab(), out_dir + "/" + name);
        }
      });

  slabforge::write_time_series(records, out_dir + "/time_series.csv");
  slabforge::write_mesh_file(sim.current_mesh(), out_dir + "/final_mesh.stm");
  const slabforge::StepRecord& last = records.back();
  std::cout << "simulated " << records.size() << " slabs to t=" << slabforge::format_double(last.t)
            << " (" << swaps << " swaps)\n"
            << "final state: d=" << slabforge::format_double(last.d)
            << " ddot=" << slabforge::format_double(last.ddot)
            << " theta=" << slabforge::format_double(last.theta)
            << " thetadot=" << slabforge::format_double(last.thetadot) << "\n"
            << "outputs in " << out_dir << "\n";
  return kExitOk;
}

int run_cuts_census() {
  const std::array<slabforge::VertexId, 3> bottom{0, 1, 2};
  const std::array<slabforge::VertexId, 3> top{3, 4, 5};
  const auto assignments = slabforge::enumerate_prism_cut_assignments(bottom, top);
  int valid = 0;
  for (std::size_t mask = 0; mask < assignments.size(); ++mask) {
    const bool ok = slabforge::is_valid_cut(assignments[mask]);
    valid += ok ? 1 : 0;
    std::cout << "assignment " << mask << ": ";
    for (const auto& [a, b] : assignments[mask]) {
      std::cout << a << "-" << b << " ";
    }
    std::cout << (ok ? "valid" : "INVALID (perfect matching)") << "\n";
  }
  std::cout << valid << " of " << assignments.size() << " diagonal assignments are valid\n";
  return valid == 6 ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slabforge: space-time sliding-mesh extrusion and rigid-body coupling"};
  app.require_subcommand(1);

  std::string config_path, out_path, mesh_path, next_path, in_path, out_dir;
  bool swap_flag = false, vtk_flag = false;
  double t0 = 0.0, t1 = 1.0;

  CLI::App* generate = app.add_subcommand("generate", "build a mesh from a config file");
  generate->add_option("--config", config_path, "config file")->required();
  generate->add_option("-o,--output", out_path, "output mesh path (.stm)")->required();

  CLI::App* extrude = app.add_subcommand("extrude", "extrude one space-time slab");
  extrude->add_option("--mesh", mesh_path, "mesh at the slab bottom (.stm)")->required();
  extrude->add_option("--mesh-next", next_path, "mesh at the slab top (.stm)")->required();
  extrude->add_flag("--swap", swap_flag, "the pair crosses one diagonal swap");
  extrude->add_option("--t0", t0, "slab start time (default 0)");
  extrude->add_option("--t1", t1, "slab end time (default 1)");
  extrude->add_option("-o,--output", out_path, "output slab path (.sts)")->required();

  CLI::App* validate = app.add_subcommand("validate", "validate a mesh or slab file");
  validate->add_option("file", in_path, "mesh (.stm) or slab (.sts) file")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "run the coupled rigid-body simulation");
  simulate->add_option("--config", config_path, "config file")->required();
  simulate->add_option("--out-dir", out_dir, "output directory")->required();
  simulate->add_flag("--vtk", vtk_flag, "export each slab as VTK");

  app.add_subcommand("cuts-census", "enumerate the 8 prism diagonal assignments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return run_generate(config_path, out_path);
    if (extrude->parsed()) return run_extrude(mesh_path, next_path, swap_flag, t0, t1, out_path);
    if (validate->parsed()) return run_validate(in_path);
    if (simulate->parsed()) return run_simulate(config_path, out_dir, vtk_flag);
    return run_cuts_census();
  } catch (const slabforge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const slabforge::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const slabforge::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const slabforge::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const slabforge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
