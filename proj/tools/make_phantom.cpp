// Authors the bundled phantom abdomen: a half-ellipsoid dome resting on the
// bed plane, written as ASCII OFF plus a JSON manifest.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ifind/surface/manifest.hpp"
#include "ifind/surface/shapes.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the phantom-abdomen mesh and its manifest"};
  std::string out_dir = ".";
  double semi_x = 0.18, semi_y = 0.14, semi_z = 0.10;
  int rings = 24, segments = 48;
  app.add_option("--out-dir", out_dir, "Directory receiving phantom-abdomen.off/.manifest.json");
  app.add_option("--semi-x", semi_x, "Semi-axis along the bed (m)");
  app.add_option("--semi-y", semi_y, "Semi-axis across the bed (m)");
  app.add_option("--semi-z", semi_z, "Dome height (m)");
  app.add_option("--rings", rings);
  app.add_option("--segments", segments);
  CLI11_PARSE(app, argc, argv);

  using namespace ifind::surface;
  const auto mesh = make_ellipsoid_dome(semi_x, semi_y, semi_z, rings, segments);
  const std::string off = to_off(mesh);
  std::ofstream(out_dir + "/phantom-abdomen.off", std::ios::binary) << off;
  const auto manifest = make_manifest("phantom-abdomen", mesh, off);
  std::ofstream(out_dir + "/phantom-abdomen.manifest.json", std::ios::binary)
      << to_json(manifest).dump(2) << "\n";
  std::cout << "wrote " << manifest.vertex_count << " vertices, " << manifest.triangle_count
            << " triangles\n";
  return 0;
}
