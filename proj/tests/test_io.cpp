#include <gtest/gtest.h>

#include <cstring>

#include <filesystem>
#include <fstream>

#include "inrmri/io.hpp"
#include "test_support.hpp"

using namespace inrmri;
namespace fs = std::filesystem;
using testing_support::Lcg;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("inrmri_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

// float32 storage: values that are exactly representable survive unchanged
ComplexImage f32_image(Lcg& g, std::size_t h, std::size_t w) {
  ComplexImage img(h, w);
  for (cplx& z : img.values())
    z = {static_cast<float>(g.uniform(-1, 1)), static_cast<float>(g.uniform(-1, 1))};
  return img;
}

std::string bytes_of(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

using Io = TempDir;

TEST_F(Io, TensorLayoutIsLittleEndianFloatPairs) {
  io::write_tensor(dir_ / "t.cplx", io::Tensor{{1, 2}, {cplx{1.0, -2.0}, cplx{0.5, 0.0}}});
  const std::string b = bytes_of(dir_ / "t.cplx");
  ASSERT_EQ(b.size(), 8u + 4 + 8 + 16);
  EXPECT_EQ(b.substr(0, 8), std::string("CPLX1\0\0\0", 8));
  EXPECT_EQ(b[8], 2);
  EXPECT_EQ(b[12], 1);
  EXPECT_EQ(b[16], 2);
  float re = 0;
  std::memcpy(&re, b.data() + 20, 4);
  EXPECT_EQ(re, 1.0f);
  std::memcpy(&re, b.data() + 24, 4);
  EXPECT_EQ(re, -2.0f);
}

TEST_F(Io, ImageKspaceSmapsRoundTrip) {
  Lcg g(81);
  const ComplexImage img = f32_image(g, 5, 7);
  io::save_image(dir_ / "img.cplx", img);
  EXPECT_EQ(io::load_image(dir_ / "img.cplx"), img);
  EXPECT_EQ(io::read_sidecar(dir_ / "img.cplx")["kind"], "image");

  KSpaceGrid k(3, 5, 7);
  for (std::size_t c = 0; c < 3; ++c) k.set_plane(c, f32_image(g, 5, 7));
  io::save_kspace(dir_ / "k.cplx", k);
  EXPECT_EQ(io::load_kspace(dir_ / "k.cplx"), k);
  EXPECT_EQ(io::read_sidecar(dir_ / "k.cplx")["dims"], (io::json{3, 5, 7}));

  SensitivityMaps s(3, 5, 7);
  for (std::size_t c = 0; c < 3; ++c) s.set_plane(c, f32_image(g, 5, 7));
  io::save_smaps(dir_ / "s.cplx", s);
  EXPECT_EQ(io::load_smaps(dir_ / "s.cplx"), s);
}

TEST_F(Io, MaskRoundTripKeepsParameters) {
  const SamplingMask m = make_uniform_mask(20, 6, 3, 4, 2);
  io::save_mask(dir_ / "m.cplx", m);
  const io::json side = io::read_sidecar(dir_ / "m.cplx");
  EXPECT_EQ(side["R"], 3);
  EXPECT_EQ(side["acs"], 4);
  EXPECT_EQ(io::load_mask(dir_ / "m.cplx"), m);
}

TEST_F(Io, KindMismatchAndCorruptFiles) {
  io::save_image(dir_ / "img.cplx", ComplexImage(4, 4));
  EXPECT_THROW(io::load_kspace(dir_ / "img.cplx"), IoError);
  EXPECT_THROW(io::load_image(dir_ / "missing.cplx"), IoError);
  std::ofstream(dir_ / "junk.cplx") << "not a tensor";
  EXPECT_THROW(io::load_image(dir_ / "junk.cplx"), IoError);
  std::string b = bytes_of(dir_ / "img.cplx");
  b.resize(b.size() - 3);
  std::ofstream(dir_ / "short.cplx", std::ios::binary) << b;
  EXPECT_THROW(io::read_tensor(dir_ / "short.cplx"), IoError);
}

TEST_F(Io, PartiallySampledMaskRowRejected) {
  io::Tensor t{{2, 2}, {cplx{1, 0}, cplx{0, 0}, cplx{1, 0}, cplx{1, 0}}};
  io::write_tensor(dir_ / "m.cplx", t);
  EXPECT_THROW(io::load_mask(dir_ / "m.cplx"), IoError);
}

TEST_F(Io, NetworkCheckpointRoundTrip) {
  ReconConfig cfg;
  cfg.layer_count = 3;
  cfg.hidden_neurons = 6;
  cfg.seed = 12;
  // float storage is exact for float networks
  auto nets = init_networks<float>(cfg);
  nets.data_scale = 0.125;
  io::save_networks(dir_ / "nets", nets);
  const auto back = io::load_networks<float>(dir_ / "nets");
  EXPECT_EQ(back.real, nets.real);
  EXPECT_EQ(back.imag, nets.imag);
  EXPECT_EQ(back.data_scale, 0.125);
  const io::json manifest = io::read_json(dir_ / "nets" / "real" / "manifest.json");
  EXPECT_EQ(manifest["w0"], 25.0);
  EXPECT_EQ(manifest["hidden_w"], 30.0);
  EXPECT_EQ(manifest["activation"], "sine");
  EXPECT_EQ(manifest["seed"], 12);
}

TEST_F(Io, KernelRoundTrip) {
  Lcg g(82);
  GrappaKernel k = grappa_calibrate(testing_support::random_kspace(g, 2, 30, 16), 3, 3, 2);
  for (auto& w : k.weights)
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w.data()[i] = {static_cast<float>(w.data()[i].real()), static_cast<float>(w.data()[i].imag())};
  io::save_kernel(dir_ / "kernel.cplx", k);
  const GrappaKernel back = io::load_kernel(dir_ / "kernel.cplx");
  EXPECT_EQ(back.R, 3);
  EXPECT_EQ(back.kx_extent, 3);
  EXPECT_EQ(back.ky_taps, 2);
  EXPECT_EQ(back.coils, 2u);
  for (std::size_t d = 0; d < k.weights.size(); ++d) EXPECT_EQ(back.weights[d], k.weights[d]);
}

TEST(Config, JsonRoundTripAndStrictKeys) {
  ReconConfig c = ReconConfig::brain();
  c.iterations = 77;
  c.activation = Activation::ReLU;
  c.data_norm = 3.5;
  c.precision = Precision::Float32;
  EXPECT_EQ(io::config_from_json(io::config_to_json(c)), c);
  c.data_norm.reset();
  EXPECT_EQ(io::config_to_json(c)["data_norm"], "auto");
  EXPECT_EQ(io::config_from_json(io::config_to_json(c)), c);

  EXPECT_EQ(io::config_from_json(io::json{{"w0", 10}}).w0, 10.0);
  EXPECT_THROW(io::config_from_json(io::json{{"w_0", 10}}), std::invalid_argument);
  EXPECT_THROW(io::config_from_json(io::json{{"iterations", 0}}), std::invalid_argument);
  EXPECT_THROW(io::config_from_json(io::json{{"activation", 3}}), std::invalid_argument);
  EXPECT_THROW(io::config_from_json(io::json{{"data_norm", "max"}}), std::invalid_argument);
}

TEST(LossCsv, FormatIsStable) {
  std::vector<LossRecord> h{{100, {1.5, 0.25, 2.25, 3.0}}, {150, {0.1, 0.0, 0.1, 0.0}}};
  EXPECT_EQ(io::loss_csv(h), "iteration,dc,tv,total\n100,1.5,0.25,2.25\n150,0.10000000000000001,0,0.10000000000000001\n");
}

TEST(MetricsJson, KeysSorted) {
  EXPECT_EQ(io::metrics_json(31.5, 0.9).dump(), R"({"psnr_db":31.5,"ssim":0.9})");
}
