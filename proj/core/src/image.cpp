#include "mforge/image.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include "mforge/errors.hpp"

namespace mforge {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

void clamp01_inplace(Tensor& image) {
  for (double& v : image.vec()) v = clamp01(v);
}

void write_pgm(const std::string& path, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 1) {
    throw UsageError("write_pgm expects a (1,H,W) image, got " + image.shape_str());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  const int H = image.dim(1), W = image.dim(2);
  out << "P5\n" << W << " " << H << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(W));
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double v = clamp01(image.at(0, y, x));
      row[static_cast<std::size_t>(x)] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), W);
  }
  if (!out) throw DataError("short write: " + path);
}

namespace {

int read_pnm_token(std::istream& in, const std::string& path) {
  // skips whitespace and '#' comments
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF) throw DataError("truncated PGM header: " + path);
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

}  // namespace

Tensor read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') throw DataError("not a binary PGM (P5): " + path);
  const int W = read_pnm_token(in, path);
  const int H = read_pnm_token(in, path);
  const int maxval = read_pnm_token(in, path);
  if (W <= 0 || H <= 0 || maxval != 255) throw DataError("unsupported PGM header in " + path);
  std::vector<unsigned char> raw(static_cast<std::size_t>(W) * H);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw DataError("truncated PGM payload: " + path);
  }
  Tensor img({1, H, W});
  for (std::size_t i = 0; i < raw.size(); ++i) img[static_cast<int>(i)] = raw[i] / 255.0;
  return img;
}

Tensor gaussian_blur(const Tensor& image, double sigma) {
  if (image.rank() != 3) throw UsageError("gaussian_blur expects (C,H,W), got " + image.shape_str());
  if (sigma < 0.0) throw UsageError("gaussian_blur sigma must be >= 0");
  if (sigma == 0.0) return image;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;

  const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - i - 1;
    }
    return i;
  };
  Tensor tmp({C, H, W});
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[static_cast<std::size_t>(k + radius)] * image.at(c, y, reflect(x + k, W));
        }
        tmp.at(c, y, x) = acc;
      }
    }
  }
  Tensor out({C, H, W});
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[static_cast<std::size_t>(k + radius)] * tmp.at(c, reflect(y + k, H), x);
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

double laplacian_variance(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 1) {
    throw UsageError("laplacian_variance expects (1,H,W), got " + image.shape_str());
  }
  const int H = image.dim(1), W = image.dim(2);
  if (H < 3 || W < 3) return 0.0;
  std::vector<double> resp;
  resp.reserve(static_cast<std::size_t>((H - 2) * (W - 2)));
  for (int y = 1; y < H - 1; ++y) {
    for (int x = 1; x < W - 1; ++x) {
      resp.push_back(image.at(0, y - 1, x) + image.at(0, y + 1, x) + image.at(0, y, x - 1) +
                     image.at(0, y, x + 1) - 4.0 * image.at(0, y, x));
    }
  }
  double mean = 0.0;
  for (double v : resp) mean += v;
  mean /= static_cast<double>(resp.size());
  double var = 0.0;
  for (double v : resp) var += (v - mean) * (v - mean);
  return var / static_cast<double>(resp.size());
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  char buf[4096];
  std::uint64_t h = seed;
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    if (got > 0) h = fnv1a64(buf, static_cast<std::size_t>(got), h);
  }
  return h;
}

}  // namespace mforge
