#include "fishrect/image_io.hpp"

#include <png.h>
#include <jpeglib.h>

#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "fishrect/warp.hpp"

namespace fishrect {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode, ErrorKind kind) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(kind, "cannot open " + path.string());
  return f;
}

Image8 read_png(const std::filesystem::path& path) {
  auto file = open_file(path, "rb", ErrorKind::MissingFile);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorKind::IoError, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorKind::IoError, "libpng init failed");
  }
  Image8 img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::ParseError, "corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int width = int(png_get_image_width(png, info));
  const int height = int(png_get_image_height(png, info));
  const int channels = int(png_get_channels(png, info));
  img = Image8(width, height, channels);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = img.data().data() + img.index(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

Image8 read_jpeg(const std::filesystem::path& path) {
  auto file = open_file(path, "rb", ErrorKind::MissingFile);
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  Image8 img;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorKind::ParseError, "corrupt JPEG: " + path.string());
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components != 1) cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  img = Image8(int(cinfo.output_width), int(cinfo.output_height), int(cinfo.output_components));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img.data().data() + img.index(0, int(cinfo.output_scanline));
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

}  // namespace

Image8 read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error(ErrorKind::MissingFile, path.string());
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), sizeof sig);
  if (probe.gcount() >= 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (probe.gcount() >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) {
    return read_jpeg(path);
  }
  throw Error(ErrorKind::ParseError, "not a PNG or JPEG file: " + path.string());
}

void write_png(const std::filesystem::path& path, const Image8& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(ErrorKind::DimensionMismatch, "PNG output supports 1 or 3 channels");
  }
  if (img.empty()) throw Error(ErrorKind::DimensionMismatch, "cannot write an empty image");
  auto file = open_file(path, "wb", ErrorKind::WriteFailure);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorKind::IoError, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorKind::IoError, "libpng init failed");
  }
  std::vector<png_bytep> rows(img.height());
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::WriteFailure, "PNG encoding failed: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(img.width()), png_uint_32(img.height()), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height(); ++y) {
    rows[y] = const_cast<png_bytep>(img.data().data() + img.index(0, y));
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_mask_png(const std::filesystem::path& path, const ValidMask& mask) {
  Image8 img(int(mask.cols()), int(mask.rows()), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) img.at(x, y) = mask(y, x) ? 255 : 0;
  }
  write_png(path, img);
}

ValidMask read_mask_png(const std::filesystem::path& path) {
  const Image8 img = read_image(path);
  ValidMask mask(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) mask(y, x) = img.at(x, y) >= 128;
  }
  return mask;
}

void write_feature(const std::filesystem::path& path, const Image8& feature) {
  if (feature.channels() != 6) {
    throw Error(ErrorKind::DimensionMismatch, "feature maps have 6 channels");
  }
  const auto stem = path.stem().string();
  const auto dir = path.parent_path();
  const std::string first = stem + "_a.png";
  const std::string second = stem + "_b.png";
  write_png(dir / first, slice_channels(feature, 0, 3));
  write_png(dir / second, slice_channels(feature, 3, 3));

  nlohmann::ordered_json sidecar;
  sidecar["width"] = feature.width();
  sidecar["height"] = feature.height();
  sidecar["channels"] = 6;
  sidecar["halves"] = {first, second};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::WriteFailure, path.string());
  out << sidecar.dump(2) << '\n';
}

Image8 read_feature(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  nlohmann::json sidecar;
  try {
    in >> sidecar;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  const auto halves = sidecar.find("halves");
  if (halves == sidecar.end() || !halves->is_array() || halves->size() != 2) {
    throw Error(ErrorKind::MissingField, "feature sidecar needs 'halves' with two entries");
  }
  const auto dir = path.parent_path();
  const Image8 a = read_image(dir / (*halves)[0].get<std::string>());
  const Image8 b = read_image(dir / (*halves)[1].get<std::string>());
  return concat_channels(a, b);
}

}  // namespace fishrect
