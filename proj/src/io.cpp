#include "slabforge/io.hpp"

#include <array>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include "slabforge/error.hpp"
#include "slabforge/log.hpp"

namespace slabforge {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failure: " + path);
}

namespace {

/// Whitespace-separated token stream over a text buffer, tracking the byte
/// offset for parse errors.
class TokenReader {
 public:
  explicit TokenReader(const std::string& text) : text_(text) {}

  bool at_end() {
    skip_ws();
    return pos_ == text_.size();
  }

  std::size_t offset() const { return pos_; }

  std::string next() {
    skip_ws();
    if (pos_ == text_.size()) throw ParseError("unexpected end of file", pos_);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_ws(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void expect(const std::string& keyword) {
    skip_ws();
    const std::size_t at = pos_;
    const std::string tok = next();
    if (tok != keyword) {
      throw ParseError("expected '" + keyword + "', found '" + tok + "'", at);
    }
  }

  std::int64_t next_int() {
    skip_ws();
    const std::size_t at = pos_;
    const std::string tok = next();
    std::int64_t value = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw ParseError("expected integer, found '" + tok + "'", at);
    }
    return value;
  }

  double next_double() {
    skip_ws();
    const std::size_t at = pos_;
    const std::string tok = next();
    double value = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw ParseError("expected number, found '" + tok + "'", at);
    }
    return value;
  }

 private:
  static bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
  void skip_ws() {
    while (pos_ < text_.size() && is_ws(text_[pos_])) ++pos_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

Region region_from_name(const std::string& name, std::size_t at) {
  if (name == "rotating") return Region::Rotating;
  if (name == "buffer") return Region::Buffer;
  if (name == "sliding") return Region::Sliding;
  if (name == "static") return Region::Static;
  throw ParseError("unknown region '" + name + "'", at);
}

Layer layer_from_name(const std::string& name, std::size_t at) {
  if (name == "buffer") return Layer::Buffer;
  if (name == "sliding") return Layer::Sliding;
  throw ParseError("unknown layer '" + name + "'", at);
}

const char* region_name(Region r) { return to_string(r); }
const char* layer_name(Layer l) { return to_string(l); }

VertexId checked_vertex(TokenReader& in, std::int64_t n) {
  const std::size_t at = in.offset();
  const std::int64_t v = in.next_int();
  if (v < 0 || v >= n) {
    throw ParseError("vertex id " + std::to_string(v) + " out of range [0, " +
                         std::to_string(n) + ")",
                     at);
  }
  return v;
}

void check_version(TokenReader& in, const std::string& magic) {
  in.expect(magic);
  const std::size_t at = in.offset();
  const std::string version = in.next();
  if (version != "1") {
    throw ParseError("unsupported " + magic + " version '" + version + "'", at);
  }
}

}  // namespace

std::string serialize_mesh(const SpatialMesh& mesh) {
  std::string out;
  out += "STMESH 1\n";
  out += "VERTICES " + std::to_string(mesh.vertices.size()) + "\n";
  for (const Vertex& v : mesh.vertices) {
    out += std::to_string(v.id) + " " + format_double(v.pos.x) + " " + format_double(v.pos.y) +
           "\n";
  }
  out += "TRIANGLES " + std::to_string(mesh.triangles.size()) + "\n";
  for (const Triangle& t : mesh.triangles) {
    out += std::to_string(t.v[0]) + " " + std::to_string(t.v[1]) + " " + std::to_string(t.v[2]) +
           "\n";
  }
  out += "QUADS " + std::to_string(mesh.quads.size()) + "\n";
  for (const AnnulusQuad& q : mesh.quads) {
    out += std::to_string(q.n1) + " " + std::to_string(q.n2) + " " + std::to_string(q.n3) + " " +
           std::to_string(q.n4) + " " + layer_name(q.layer) + "\n";
  }
  out += "REGIONS " + std::to_string(mesh.triangles.size()) + "\n";
  for (const Triangle& t : mesh.triangles) {
    out += std::string(region_name(t.region)) + "\n";
  }
  if (mesh.annulus) {
    const Annulus& a = *mesh.annulus;
    out += "RINGS 3\n";
    const auto ring_line = [&out](const char* name, const std::vector<VertexId>& seq) {
      out += std::string(name) + " " + std::to_string(seq.size());
      for (VertexId v : seq) out += " " + std::to_string(v);
      out += "\n";
    };
    ring_line("inner", a.inner_ring.seq);
    ring_line("mid", a.mid_ring);
    ring_line("outer", a.outer_ring.seq);
  } else {
    out += "RINGS 0\n";
  }
  out += "CENTER " + format_double(mesh.rotation_center.x) + " " +
         format_double(mesh.rotation_center.y) + "\n";
  out += "OFFSET " + std::to_string(mesh.id_offset) + "\n";
  if (mesh.annulus) {
    out += "SLIDING " + std::to_string(mesh.annulus->n_quads) + " " +
           std::to_string(mesh.annulus->sliding_shift) + "\n";
  }
  out += "BODY " + std::to_string(mesh.body_loop.size());
  for (VertexId v : mesh.body_loop) out += " " + std::to_string(v);
  out += "\n";
  return out;
}

SpatialMesh parse_mesh(const std::string& text) {
  TokenReader in(text);
  check_version(in, "STMESH");
  SpatialMesh mesh;

  in.expect("VERTICES");
  const std::int64_t n = in.next_int();
  if (n < 0) throw ParseError("negative vertex count", in.offset());
  mesh.vertices.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t at = in.offset();
    const std::int64_t id = in.next_int();
    if (id != i) {
      throw ParseError("vertex ids must be 0..n-1 in order; found " + std::to_string(id) +
                           " at position " + std::to_string(i),
                       at);
    }
    Vertex v;
    v.id = id;
    v.pos.x = in.next_double();
    v.pos.y = in.next_double();
    mesh.vertices.push_back(v);
  }

  in.expect("TRIANGLES");
  const std::int64_t m = in.next_int();
  if (m < 0) throw ParseError("negative triangle count", in.offset());
  mesh.triangles.reserve(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    Triangle t;
    for (int k = 0; k < 3; ++k) t.v[static_cast<std::size_t>(k)] = checked_vertex(in, n);
    mesh.triangles.push_back(t);
  }

  in.expect("QUADS");
  const std::int64_t q = in.next_int();
  if (q < 0) throw ParseError("negative quad count", in.offset());
  mesh.quads.reserve(static_cast<std::size_t>(q));
  for (std::int64_t i = 0; i < q; ++i) {
    AnnulusQuad quad;
    quad.n1 = checked_vertex(in, n);
    quad.n2 = checked_vertex(in, n);
    quad.n3 = checked_vertex(in, n);
    quad.n4 = checked_vertex(in, n);
    const std::size_t at = in.offset();
    quad.layer = layer_from_name(in.next(), at);
    mesh.quads.push_back(quad);
  }

  in.expect("REGIONS");
  const std::int64_t r = in.next_int();
  if (r != m) {
    throw ParseError("REGIONS count " + std::to_string(r) + " does not match TRIANGLES count " +
                         std::to_string(m),
                     in.offset());
  }
  for (std::int64_t i = 0; i < m; ++i) {
    const std::size_t at = in.offset();
    mesh.triangles[static_cast<std::size_t>(i)].region = region_from_name(in.next(), at);
  }

  in.expect("RINGS");
  const std::int64_t rings = in.next_int();
  std::vector<VertexId> inner, mid, outer;
  if (rings == 3) {
    const auto ring_line = [&in, n](const char* name) {
      in.expect(name);
      const std::int64_t count = in.next_int();
      if (count < 0) throw ParseError("negative ring size", in.offset());
      std::vector<VertexId> seq;
      seq.reserve(static_cast<std::size_t>(count));
      for (std::int64_t i = 0; i < count; ++i) seq.push_back(checked_vertex(in, n));
      return seq;
    };
    inner = ring_line("inner");
    mid = ring_line("mid");
    outer = ring_line("outer");
  } else if (rings != 0) {
    throw ParseError("RINGS must be 0 or 3, found " + std::to_string(rings), in.offset());
  }

  in.expect("CENTER");
  mesh.rotation_center.x = in.next_double();
  mesh.rotation_center.y = in.next_double();
  in.expect("OFFSET");
  mesh.id_offset = in.next_int();

  if (rings == 3) {
    in.expect("SLIDING");
    Annulus a;
    a.n_quads = in.next_int();
    a.sliding_shift = in.next_int();
    a.inner_ring = RingOrdering{RingKind::InnerCircle, std::move(inner)};
    a.outer_ring = RingOrdering{RingKind::OuterCircle, std::move(outer)};
    a.mid_ring = std::move(mid);
    mesh.annulus = std::move(a);
  }

  in.expect("BODY");
  const std::int64_t b = in.next_int();
  if (b < 0) throw ParseError("negative body loop size", in.offset());
  mesh.body_loop.reserve(static_cast<std::size_t>(b));
  for (std::int64_t i = 0; i < b; ++i) mesh.body_loop.push_back(checked_vertex(in, n));

  if (!in.at_end()) throw ParseError("trailing content after BODY section", in.offset());
  return mesh;
}

void write_mesh_file(const SpatialMesh& mesh, const std::string& path) {
  write_text_file(path, serialize_mesh(mesh));
}

SpatialMesh read_mesh_file(const std::string& path) { return parse_mesh(read_text_file(path)); }

std::string serialize_slab(const SpaceTimeSlab& slab) {
  std::string out;
  out += "STSLAB 1\n";
  out += "TIMES " + format_double(slab.t_start) + " " + format_double(slab.t_end) + "\n";
  out += "BASE " + std::to_string(slab.id_base) + " " + std::to_string(slab.n_per_level) + "\n";
  out += "VERTICES " + std::to_string(slab.n_per_level) + "\n";
  for (std::int64_t i = 0; i < slab.n_per_level; ++i) {
    const Vec2 b = slab.bottom_pos[static_cast<std::size_t>(i)];
    const Vec2 t = slab.top_pos[static_cast<std::size_t>(i)];
    out += std::to_string(i) + " " + format_double(b.x) + " " + format_double(b.y) + " " +
           format_double(t.x) + " " + format_double(t.y) + "\n";
  }
  out += "TETS " + std::to_string(slab.tets.size()) + "\n";
  for (const SpaceTimeTet& tet : slab.tets) {
    out += std::to_string(tet.v[0]) + " " + std::to_string(tet.v[1]) + " " +
           std::to_string(tet.v[2]) + " " + std::to_string(tet.v[3]) + " " +
           region_name(tet.region) + "\n";
  }
  return out;
}

SpaceTimeSlab parse_slab(const std::string& text) {
  TokenReader in(text);
  check_version(in, "STSLAB");
  SpaceTimeSlab slab;

  in.expect("TIMES");
  slab.t_start = in.next_double();
  slab.t_end = in.next_double();
  if (!(slab.t_end > slab.t_start)) throw ParseError("t_end must exceed t_start", in.offset());

  in.expect("BASE");
  slab.id_base = in.next_int();
  slab.n_per_level = in.next_int();
  if (slab.n_per_level < 0) throw ParseError("negative vertex count", in.offset());

  in.expect("VERTICES");
  const std::int64_t n = in.next_int();
  if (n != slab.n_per_level) {
    throw ParseError("VERTICES count does not match BASE n_per_level", in.offset());
  }
  slab.bottom_pos.resize(static_cast<std::size_t>(n));
  slab.top_pos.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t at = in.offset();
    const std::int64_t id = in.next_int();
    if (id != i) throw ParseError("slab vertex ids must be 0..n-1 in order", at);
    slab.bottom_pos[static_cast<std::size_t>(i)].x = in.next_double();
    slab.bottom_pos[static_cast<std::size_t>(i)].y = in.next_double();
    slab.top_pos[static_cast<std::size_t>(i)].x = in.next_double();
    slab.top_pos[static_cast<std::size_t>(i)].y = in.next_double();
  }

  in.expect("TETS");
  const std::int64_t m = in.next_int();
  if (m < 0) throw ParseError("negative tet count", in.offset());
  slab.tets.reserve(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    SpaceTimeTet tet;
    for (int k = 0; k < 4; ++k) {
      const std::size_t at = in.offset();
      const std::int64_t v = in.next_int();
      if (v < slab.id_base || v >= slab.id_base + 2 * n) {
        throw ParseError("tet vertex id " + std::to_string(v) + " outside the slab id range", at);
      }
      tet.v[static_cast<std::size_t>(k)] = v;
    }
    const std::size_t at = in.offset();
    tet.region = region_from_name(in.next(), at);
    slab.tets.push_back(tet);
  }

  if (!in.at_end()) throw ParseError("trailing content after TETS section", in.offset());
  return slab;
}

void write_slab_file(const SpaceTimeSlab& slab, const std::string& path) {
  write_text_file(path, serialize_slab(slab));
}

SpaceTimeSlab read_slab_file(const std::string& path) { return parse_slab(read_text_file(path)); }

namespace {

int region_code(Region r) {
  switch (r) {
    case Region::Rotating: return 0;
    case Region::Buffer: return 1;
    case Region::Sliding: return 2;
    case Region::Static: return 3;
  }
  return 3;
}

Region region_from_code(std::int64_t code, std::size_t at) {
  switch (code) {
    case 0: return Region::Rotating;
    case 1: return Region::Buffer;
    case 2: return Region::Sliding;
    case 3: return Region::Static;
    default: throw ParseError("unknown region code " + std::to_string(code), at);
  }
}

}  // namespace

std::string serialize_slab_vtk(const SpaceTimeSlab& slab) {
  if (slab.tets.empty()) throw InvalidArgument("refusing to export a slab with no tetrahedra");
  const std::int64_t n = slab.n_per_level;
  std::string out;
  out += "# vtk DataFile Version 3.0\n";
  out += "slabforge space-time slab\n";
  out += "ASCII\n";
  out += "DATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(2 * n) + " double\n";
  for (std::int64_t i = 0; i < n; ++i) {
    const Vec2 p = slab.bottom_pos[static_cast<std::size_t>(i)];
    out += format_double(p.x) + " " + format_double(p.y) + " " + format_double(slab.t_start) +
           "\n";
  }
  for (std::int64_t i = 0; i < n; ++i) {
    const Vec2 p = slab.top_pos[static_cast<std::size_t>(i)];
    out += format_double(p.x) + " " + format_double(p.y) + " " + format_double(slab.t_end) + "\n";
  }
  const std::size_t m = slab.tets.size();
  out += "CELLS " + std::to_string(m) + " " + std::to_string(5 * m) + "\n";
  for (const SpaceTimeTet& tet : slab.tets) {
    out += "4";
    for (int k = 0; k < 4; ++k) {
      out += " " + std::to_string(tet.v[static_cast<std::size_t>(k)] - slab.id_base);
    }
    out += "\n";
  }
  out += "CELL_TYPES " + std::to_string(m) + "\n";
  for (std::size_t i = 0; i < m; ++i) out += "10\n";
  out += "CELL_DATA " + std::to_string(m) + "\n";
  out += "SCALARS region int 1\n";
  out += "LOOKUP_TABLE default\n";
  for (const SpaceTimeTet& tet : slab.tets) out += std::to_string(region_code(tet.region)) + "\n";
  out += "SCALARS cell_id int 1\n";
  out += "LOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < m; ++i) out += std::to_string(i) + "\n";
  return out;
}

SpaceTimeSlab parse_slab_vtk(const std::string& text) {
  TokenReader in(text);
  for (const char* tok : {"#", "vtk", "DataFile", "Version", "3.0", "slabforge", "space-time",
                          "slab", "ASCII", "DATASET", "UNSTRUCTURED_GRID", "POINTS"}) {
    in.expect(tok);
  }
  const std::int64_t n2 = in.next_int();
  in.expect("double");
  if (n2 <= 0 || n2 % 2 != 0) {
    throw ParseError("point count must be positive and even (two time levels)", in.offset());
  }
  const std::int64_t n = n2 / 2;
  SpaceTimeSlab slab;
  slab.id_base = 0;
  slab.n_per_level = n;
  slab.bottom_pos.resize(static_cast<std::size_t>(n));
  slab.top_pos.resize(static_cast<std::size_t>(n));
  std::vector<double> t_values(static_cast<std::size_t>(n2));
  for (std::int64_t i = 0; i < n2; ++i) {
    const double x = in.next_double();
    const double y = in.next_double();
    const double t = in.next_double();
    if (i < n) {
      slab.bottom_pos[static_cast<std::size_t>(i)] = Vec2{x, y};
    } else {
      slab.top_pos[static_cast<std::size_t>(i - n)] = Vec2{x, y};
    }
    t_values[static_cast<std::size_t>(i)] = t;
  }
  slab.t_start = t_values.front();
  slab.t_end = t_values[static_cast<std::size_t>(n)];
  for (std::int64_t i = 0; i < n2; ++i) {
    const double expected = i < n ? slab.t_start : slab.t_end;
    if (t_values[static_cast<std::size_t>(i)] != expected) {
      throw ParseError("points do not form two constant time levels", in.offset());
    }
  }
  if (!(slab.t_end > slab.t_start)) {
    throw ParseError("top time level must exceed the bottom one", in.offset());
  }

  in.expect("CELLS");
  const std::int64_t m = in.next_int();
  const std::int64_t list_len = in.next_int();
  if (m < 1 || list_len != 5 * m) throw ParseError("malformed CELLS header", in.offset());
  slab.tets.reserve(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    const std::size_t at = in.offset();
    if (in.next_int() != 4) throw ParseError("only 4-vertex cells are supported", at);
    SpaceTimeTet tet;
    for (int k = 0; k < 4; ++k) tet.v[static_cast<std::size_t>(k)] = checked_vertex(in, n2);
    slab.tets.push_back(tet);
  }
  in.expect("CELL_TYPES");
  if (in.next_int() != m) throw ParseError("CELL_TYPES count mismatch", in.offset());
  for (std::int64_t i = 0; i < m; ++i) {
    const std::size_t at = in.offset();
    if (in.next_int() != 10) throw ParseError("only tetrahedron cells (type 10) supported", at);
  }
  in.expect("CELL_DATA");
  if (in.next_int() != m) throw ParseError("CELL_DATA count mismatch", in.offset());
  for (const char* tok : {"SCALARS", "region", "int", "1", "LOOKUP_TABLE", "default"}) {
    in.expect(tok);
  }
  for (std::int64_t i = 0; i < m; ++i) {
    const std::size_t at = in.offset();
    slab.tets[static_cast<std::size_t>(i)].region = region_from_code(in.next_int(), at);
  }
  for (const char* tok : {"SCALARS", "cell_id", "int", "1", "LOOKUP_TABLE", "default"}) {
    in.expect(tok);
  }
  for (std::int64_t i = 0; i < m; ++i) {
    const std::size_t at = in.offset();
    if (in.next_int() != i) throw ParseError("cell_id scalars must be 0..m-1 in order", at);
  }
  if (!in.at_end()) throw ParseError("trailing content after cell data", in.offset());
  return slab;
}

void write_slab_vtk(const SpaceTimeSlab& slab, const std::string& path) {
  write_text_file(path, serialize_slab_vtk(slab));
}

SpaceTimeSlab read_slab_vtk(const std::string& path) {
  return parse_slab_vtk(read_text_file(path));
}

std::string time_series_header() { return "t,d,ddot,theta,thetadot,Fy,M,outer_iters,swapped"; }

std::string time_series_row(const StepRecord& r) {
  return format_double(r.t) + "," + format_double(r.d) + "," + format_double(r.ddot) + "," +
         format_double(r.theta) + "," + format_double(r.thetadot) + "," + format_double(r.Fy) +
         "," + format_double(r.M) + "," + std::to_string(r.outer_iters) + "," +
         (r.swapped ? "1" : "0");
}

void write_time_series(const std::vector<StepRecord>& records, const std::string& path) {
  std::string out = time_series_header() + "\n";
  for (const StepRecord& r : records) out += time_series_row(r) + "\n";
  write_text_file(path, out);
}

SpatialMesh MeshSpec::build() const {
  switch (kind) {
    case Kind::AnnulusDisk:
      return generate_annulus_disk_mesh(center, r_rotating, r_mid, r_outer, r_static, n_quads);
    case Kind::BoxRing:
      return generate_box_ring_mesh(center, body_half, domain_half, n_side, n_layers);
  }
  throw InvalidArgument("unknown mesh kind");
}

std::unique_ptr<ForceProvider> ProviderSpec::build(const FluidParams& fluid) const {
  if (kind == "zero") return make_zero_provider();
  if (kind == "constant") return make_constant_provider(Vec2{fx, fy}, moment);
  if (kind == "sine") return make_sine_provider(amplitude_fy, amplitude_m, omega);
  if (kind == "linear") return make_linear_provider(k_d, k_ddot, k_theta, k_thetadot);
  if (kind == "quasi_steady") {
    return make_quasi_steady_provider(table, qs_rho, u_ref, body_height);
  }
  if (kind == "pressure_field") {
    return make_pressure_field_provider(fluid, c0, cx, cy, eps, gauss_points);
  }
  throw InvalidArgument("unknown provider kind '" + kind + "'");
}

namespace {

struct ConfigEntry {
  std::string value;
  int line = 0;
};

/// section -> key -> (value, line). Strict: duplicate keys are errors.
using ConfigTable = std::map<std::string, std::map<std::string, ConfigEntry>>;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

ConfigTable parse_config_table(const std::string& text,
                               std::map<std::string, int>* section_lines = nullptr) {
  ConfigTable table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("empty section name", line_no);
      table[section];  // register even if empty
      if (section_lines) section_lines->emplace(section, line_no);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value' or '[section]'", line_no);
    }
    if (section.empty()) throw ConfigError("key outside any section", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    auto [it, inserted] = table[section].emplace(key, ConfigEntry{value, line_no});
    if (!inserted) {
      throw ConfigError("duplicate key '" + key + "' (first at line " +
                            std::to_string(it->second.line) + ")",
                        line_no);
    }
  }
  return table;
}

double to_double(const ConfigEntry& e, const std::string& key) {
  double v = 0.0;
  const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size()) {
    throw ConfigError("key '" + key + "' expects a number, got '" + e.value + "'", e.line);
  }
  return v;
}

std::int64_t to_int(const ConfigEntry& e, const std::string& key) {
  std::int64_t v = 0;
  const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size()) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + e.value + "'", e.line);
  }
  return v;
}

bool to_bool(const ConfigEntry& e, const std::string& key) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + e.value + "'", e.line);
}

std::vector<double> to_double_list(const ConfigEntry& e, const std::string& key) {
  std::vector<double> values;
  std::size_t start = 0;
  const std::string& s = e.value;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    const std::string item = trim(s.substr(start, comma - start));
    if (item.empty()) {
      throw ConfigError("key '" + key + "' has an empty list element", e.line);
    }
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw ConfigError("key '" + key + "' expects numbers, got '" + item + "'", e.line);
    }
    values.push_back(v);
    start = comma + 1;
    if (comma == s.size()) break;
  }
  return values;
}

/// Applies `handler(key, entry)` for every key in the section, erroring on
/// keys the handler does not recognize.
template <typename Handler>
void consume_section(const ConfigTable& table, const std::string& section, Handler&& handler) {
  const auto it = table.find(section);
  if (it == table.end()) return;
  for (const auto& [key, entry] : it->second) {
    if (!handler(key, entry)) {
      throw ConfigError("unknown key '" + key + "' in section [" + section + "]", entry.line);
    }
  }
}

void parse_dof_section(const ConfigTable& table, const std::string& section, DofConfig& dof) {
  consume_section(table, section, [&](const std::string& key, const ConfigEntry& e) {
    if (key == "active") {
      dof.active = to_bool(e, key);
    } else if (key == "inertia") {
      dof.params.inertia = to_double(e, key);
    } else if (key == "damping") {
      dof.params.damping = to_double(e, key);
    } else if (key == "stiffness") {
      dof.params.stiffness = to_double(e, key);
    } else if (key == "initial_value") {
      dof.initial_value = to_double(e, key);
    } else if (key == "initial_rate") {
      dof.initial_rate = to_double(e, key);
    } else {
      return false;
    }
    return true;
  });
}

}  // namespace

RunSpec parse_run_config(const std::string& text) {
  std::map<std::string, int> section_lines;
  const ConfigTable table = parse_config_table(text, &section_lines);
  static const std::set<std::string> known_sections = {
      "simulation", "fluid", "mesh", "blend", "heave", "pitch", "provider"};
  for (const auto& [section, keys] : table) {
    (void)keys;
    if (known_sections.find(section) == known_sections.end()) {
      const auto it = section_lines.find(section);
      throw ConfigError("unknown section [" + section + "]",
                        it == section_lines.end() ? 0 : it->second);
    }
  }

  RunSpec spec;

  bool have_t_end = false, have_dt = false;
  consume_section(table, "simulation", [&](const std::string& key, const ConfigEntry& e) {
    if (key == "t_start") {
      spec.coupling.t_start = to_double(e, key);
    } else if (key == "t_end") {
      spec.coupling.t_end = to_double(e, key);
      have_t_end = true;
    } else if (key == "dt") {
      spec.coupling.dt = to_double(e, key);
      have_dt = true;
    } else if (key == "delta_rb") {
      spec.coupling.delta_rb = to_double(e, key);
    } else if (key == "max_outer_iters") {
      spec.coupling.max_outer_iters = static_cast<int>(to_int(e, key));
    } else if (key == "validate_each_slab") {
      spec.coupling.validate_each_slab = to_bool(e, key);
    } else {
      return false;
    }
    return true;
  });
  if (table.count("simulation") != 0 && (!have_t_end || !have_dt)) {
    throw ConfigError("section [simulation] requires both t_end and dt");
  }

  consume_section(table, "fluid", [&](const std::string& key, const ConfigEntry& e) {
    if (key == "rho") {
      spec.coupling.fluid.rho = to_double(e, key);
    } else if (key == "nu") {
      spec.coupling.fluid.nu = to_double(e, key);
    } else {
      return false;
    }
    return true;
  });

  if (table.count("mesh") == 0) throw ConfigError("missing required section [mesh]");
  bool have_kind = false;
  consume_section(table, "mesh", [&](const std::string& key, const ConfigEntry& e) {
    if (key == "kind") {
      if (e.value == "annulus_disk") {
        spec.mesh.kind = MeshSpec::Kind::AnnulusDisk;
      } else if (e.value == "box_ring") {
        spec.mesh.kind = MeshSpec::Kind::BoxRing;
      } else {
        throw ConfigError("mesh kind must be annulus_disk or box_ring, got '" + e.value + "'",
                          e.line);
      }
      have_kind = true;
    } else if (key == "center_x") {
      spec.mesh.center.x = to_double(e, key);
    } else if (key == "center_y") {
      spec.mesh.center.y = to_double(e, key);
    } else if (key == "r_rotating") {
      spec.mesh.r_rotating = to_double(e, key);
    } else if (key == "r_mid") {
      spec.mesh.r_mid = to_double(e, key);
    } else if (key == "r_outer") {
      spec.mesh.r_outer = to_double(e, key);
    } else if (key == "r_static") {
      spec.mesh.r_static = to_double(e, key);
    } else if (key == "n_quads") {
      spec.mesh.n_quads = to_int(e, key);
    } else if (key == "body_half") {
      spec.mesh.body_half = to_double(e, key);
    } else if (key == "domain_half") {
      spec.mesh.domain_half = to_double(e, key);
    } else if (key == "n_side") {
      spec.mesh.n_side = to_int(e, key);
    } else if (key == "n_layers") {
      spec.mesh.n_layers = to_int(e, key);
    } else {
      return false;
    }
    return true;
  });
  if (!have_kind) throw ConfigError("section [mesh] requires key 'kind'");

  if (table.count("blend") != 0) {
    Vec2 center{0.0, 0.0};
    double ihx = 0.0, ihy = 0.0, ohx = 0.0, ohy = 0.0;
    int section_line = 0;
    consume_section(table, "blend", [&](const std::string& key, const ConfigEntry& e) {
      section_line = section_line == 0 ? e.line : std::min(section_line, e.line);
      if (key == "center_x") {
        center.x = to_double(e, key);
      } else if (key == "center_y") {
        center.y = to_double(e, key);
      } else if (key == "inner_half_x") {
        ihx = to_double(e, key);
      } else if (key == "inner_half_y") {
        ihy = to_double(e, key);
      } else if (key == "outer_half_x") {
        ohx = to_double(e, key);
      } else if (key == "outer_half_y") {
        ohy = to_double(e, key);
      } else {
        return false;
      }
      return true;
    });
    try {
      spec.coupling.boxes = BlendBoxes::make(
          Box{Vec2{center.x - ihx, center.y - ihy}, Vec2{center.x + ihx, center.y + ihy}},
          Box{Vec2{center.x - ohx, center.y - ohy}, Vec2{center.x + ohx, center.y + ohy}});
    } catch (const InvalidArgument& err) {
      throw ConfigError(std::string("invalid [blend] boxes: ") + err.what(), section_line);
    }
  }

  parse_dof_section(table, "heave", spec.coupling.heave);
  parse_dof_section(table, "pitch", spec.coupling.pitch);

  consume_section(table, "provider", [&](const std::string& key, const ConfigEntry& e) {
    if (key == "kind") {
      static const std::set<std::string> kinds = {"zero",   "constant",     "sine",
                                                  "linear", "quasi_steady", "pressure_field"};
      if (kinds.find(e.value) == kinds.end()) {
        throw ConfigError("unknown provider kind '" + e.value + "'", e.line);
      }
      spec.provider.kind = e.value;
    } else if (key == "fx") {
      spec.provider.fx = to_double(e, key);
    } else if (key == "fy") {
      spec.provider.fy = to_double(e, key);
    } else if (key == "moment") {
      spec.provider.moment = to_double(e, key);
    } else if (key == "amplitude_fy") {
      spec.provider.amplitude_fy = to_double(e, key);
    } else if (key == "amplitude_m") {
      spec.provider.amplitude_m = to_double(e, key);
    } else if (key == "omega") {
      spec.provider.omega = to_double(e, key);
    } else if (key == "k_d") {
      spec.provider.k_d = to_double(e, key);
    } else if (key == "k_ddot") {
      spec.provider.k_ddot = to_double(e, key);
    } else if (key == "k_theta") {
      spec.provider.k_theta = to_double(e, key);
    } else if (key == "k_thetadot") {
      spec.provider.k_thetadot = to_double(e, key);
    } else if (key == "alpha") {
      spec.provider.table.alpha = to_double_list(e, key);
    } else if (key == "cy") {
      spec.provider.table.cy = to_double_list(e, key);
    } else if (key == "cm") {
      spec.provider.table.cm = to_double_list(e, key);
    } else if (key == "rho") {
      spec.provider.qs_rho = to_double(e, key);
    } else if (key == "u_ref") {
      spec.provider.u_ref = to_double(e, key);
    } else if (key == "body_height") {
      spec.provider.body_height = to_double(e, key);
    } else if (key == "p0") {
      spec.provider.c0 = to_double(e, key);
    } else if (key == "px") {
      spec.provider.cx = to_double(e, key);
    } else if (key == "py") {
      spec.provider.cy = to_double(e, key);
    } else if (key == "eps_xx") {
      spec.provider.eps.xx = to_double(e, key);
    } else if (key == "eps_xy") {
      spec.provider.eps.xy = to_double(e, key);
    } else if (key == "eps_yy") {
      spec.provider.eps.yy = to_double(e, key);
    } else if (key == "gauss_points") {
      spec.provider.gauss_points = static_cast<int>(to_int(e, key));
    } else {
      return false;
    }
    return true;
  });

  return spec;
}

RunSpec read_run_config_file(const std::string& path) {
  return parse_run_config(read_text_file(path));
}

}  // namespace slabforge
