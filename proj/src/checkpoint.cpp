#include "hypalign/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hypalign::checkpoint {

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'P', 'A', 'L', 'N', 'C', 'K'};

struct Writer {
  std::ofstream out;

  explicit Writer(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  }

  void bytes(const void* p, size_t n) { out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u32(uint32_t v) { bytes(&v, 4); }
  void u64(uint64_t v) { bytes(&v, 8); }
  void i64(int64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void matrix(const geometry::Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }
};

struct Reader {
  std::ifstream in;
  std::string path;

  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw std::runtime_error("cannot open checkpoint: " + p);
  }

  void bytes(void* p, size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  }
  uint8_t u8() { uint8_t v; bytes(&v, 1); return v; }
  uint32_t u32() { uint32_t v; bytes(&v, 4); return v; }
  uint64_t u64() { uint64_t v; bytes(&v, 8); return v; }
  int64_t i64() { int64_t v; bytes(&v, 8); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  geometry::Matrix matrix(int64_t rows, int64_t cols) {
    if (rows < 0 || cols < 0 || rows * cols > (1ll << 32)) {
      throw std::runtime_error("corrupt checkpoint dimensions: " + path);
    }
    geometry::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = f64();
    return m;
  }
};

}  // namespace

void save_checkpoint(const ChannelCheckpoint& ckpt, const std::string& path) {
  model::validate(ckpt.model);
  Writer w(path);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.u8(ckpt.model.kind == model::ChannelKind::structure ? 0 : 1);
  w.u64(ckpt.rng_seed);
  w.i64(ckpt.model.input_features.rows());
  w.i64(ckpt.model.input_features.cols());
  w.matrix(ckpt.model.input_features);
  w.u32(static_cast<uint32_t>(ckpt.model.layers.size()));
  for (const model::LayerParams& layer : ckpt.model.layers) {
    w.i64(layer.d_in());
    w.i64(layer.d_out());
    w.f64(layer.c_in.c());
    w.f64(layer.c_out.c());
    w.u8(layer.activation == model::Activation::relu ? 0 : 1);
    w.matrix(layer.W);
  }
  if (!w.out) throw std::runtime_error("write failed for checkpoint: " + path);
}

ChannelCheckpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) +
                             " in " + path);
  }
  ChannelCheckpoint ckpt;
  uint8_t kind = r.u8();
  ckpt.model.kind = kind == 0 ? model::ChannelKind::structure : model::ChannelKind::visual;
  ckpt.rng_seed = r.u64();
  int64_t rows = r.i64();
  int64_t cols = r.i64();
  ckpt.model.input_features = r.matrix(rows, cols);
  uint32_t layer_count = r.u32();
  for (uint32_t l = 0; l < layer_count; ++l) {
    int64_t d_in = r.i64();
    int64_t d_out = r.i64();
    double c_in = r.f64();
    double c_out = r.f64();
    uint8_t act = r.u8();
    geometry::Matrix weights = r.matrix(d_in, d_out);
    ckpt.model.layers.push_back(model::LayerParams{
        std::move(weights), geometry::Curvature(c_in), geometry::Curvature(c_out),
        act == 0 ? model::Activation::relu : model::Activation::none});
  }
  model::validate(ckpt.model);
  return ckpt;
}

}  // namespace hypalign::checkpoint
