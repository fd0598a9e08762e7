#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "fishrect/error.hpp"
#include "fishrect/image_io.hpp"
#include "fishrect/scene.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write procedural perspective scenes as PNG files", "make_corpus"};
  std::string out_dir;
  int count = 10, width = 256, height = 256;
  std::uint64_t seed = 1;
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--count", count, "Number of images")->check(CLI::PositiveNumber);
  app.add_option("--width", width, "Image width")->check(CLI::PositiveNumber);
  app.add_option("--height", height, "Image height")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Seed of the first scene; later scenes use seed + i");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "scene_%03d.png", i);
      fishrect::write_png(std::filesystem::path(out_dir) / name,
                          fishrect::make_scene(width, height, seed + std::uint64_t(i)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
