// Writes the sample meshes and problem files: make_samples <dir>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "bijmap/fixtures.hpp"
#include "bijmap/io.hpp"

namespace {

using namespace bijmap;

std::string polygon_lines(const Polytope2& p) {
  std::ostringstream os;
  for (const auto& v : p.vertices()) os << "vertex " << format_double(v.x()) << ' ' << format_double(v.y()) << '\n';
  return os.str();
}

std::string assign_lines(const std::vector<int>& a) {
  std::ostringstream os;
  for (std::size_t i = 0; i < a.size(); i += 16) {
    os << "assign";
    for (std::size_t k = i; k < std::min(a.size(), i + 16); ++k) os << ' ' << a[k];
    os << '\n';
  }
  return os.str();
}

void problem(const std::filesystem::path& path, const std::string& mesh, const Polytope2& poly,
             const std::string& assign, const char* mode) {
  std::ostringstream os;
  os << "# generated by make_samples\n";
  os << "mesh " << mesh << '\n' << polygon_lines(poly) << assign << "mode " << mode << '\n' << "K 15\n";
  write_text(path, os.str());
  std::printf("wrote %s\n", path.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "samples";
  std::filesystem::create_directories(dir);

  const auto disk = fixtures::disk_to_square(8);
  write_text(dir / "grid_disk.off", mesh_to_off(*disk.mesh));
  const std::string disk_assign = assign_lines(disk.assignment);
  problem(dir / "disk_square_free.problem", "grid_disk.off", disk.polygon, disk_assign, "free");
  problem(dir / "disk_square_fixed.problem", "grid_disk.off", disk.polygon, disk_assign, "fixed-uniform");

  const auto l = fixtures::l_to_l(4);
  write_text(dir / "l_mesh.off", mesh_to_off(*l.mesh));
  const std::string l_assign = assign_lines(l.assignment);
  problem(dir / "l_shape_free.problem", "l_mesh.off", l.polygon, l_assign, "free");
  problem(dir / "l_shape_fixed.problem", "l_mesh.off", l.polygon, l_assign, "fixed-uniform");

  // every boundary edge sent to the first three sides: the fourth is never covered
  std::vector<int> bad(disk.assignment.size());
  for (std::size_t i = 0; i < bad.size(); ++i) bad[i] = static_cast<int>(3 * i / bad.size());
  problem(dir / "disk_square_uncovered.problem", "grid_disk.off", disk.polygon, assign_lines(bad), "free");
  return 0;
}
