#pragma once

// File formats.
//
// CPLX1 tensor: 8-byte magic "CPLX1\0\0\0", little-endian u32 rank, rank x u32
// dims, then prod(dims) complex values as little-endian float32 (re, im)
// pairs, row-major (coil-major for rank 3). A JSON sidecar with the same
// basename and a ".json" extension carries {"kind", "dims", ...}.

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "inrmri/data_model.hpp"
#include "inrmri/grappa.hpp"
#include "inrmri/reconstructor.hpp"
#include "inrmri/siren.hpp"
#include "inrmri/synthetic.hpp"

namespace inrmri::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr std::array<char, 8> kMagic{'C', 'P', 'L', 'X', '1', '\0', '\0', '\0'};

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<cplx> values;

  std::size_t count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t& pos, const fs::path& path) {
  if (pos + 4 > in.size()) throw IoError(path.string() + ": truncated CPLX1 file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace detail

inline fs::path sidecar_path(const fs::path& tensor_path) {
  fs::path p = tensor_path;
  return p.replace_extension(".json");
}

inline void write_tensor(const fs::path& path, const Tensor& t) {
  inrmri::detail::require(t.values.size() == t.count(), "write_tensor: values do not match dims");
  std::string out(kMagic.begin(), kMagic.end());
  out.reserve(8 + 4 + 4 * t.dims.size() + 8 * t.values.size());
  detail::put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) detail::put_u32(out, d);
  for (const cplx& z : t.values) {
    detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.real())));
    detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.imag())));
  }
  detail::write_file(path, out);
}

inline Tensor read_tensor(const fs::path& path) {
  const std::string in = detail::read_file(path);
  if (in.size() < 12 || !std::equal(kMagic.begin(), kMagic.end(), in.begin()))
    throw IoError(path.string() + ": not a CPLX1 file");
  std::size_t pos = 8;
  Tensor t;
  const std::uint32_t rank = detail::get_u32(in, pos, path);
  if (rank > 8) throw IoError(path.string() + ": implausible rank " + std::to_string(rank));
  for (std::uint32_t i = 0; i < rank; ++i) t.dims.push_back(detail::get_u32(in, pos, path));
  const std::size_t n = t.count();
  if (in.size() != pos + 8 * n) throw IoError(path.string() + ": payload size does not match dims");
  t.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float re = std::bit_cast<float>(detail::get_u32(in, pos, path));
    const float im = std::bit_cast<float>(detail::get_u32(in, pos, path));
    t.values[i] = {re, im};
  }
  return t;
}

inline void write_json(const fs::path& path, const json& j) { detail::write_file(path, j.dump(2) + "\n"); }

inline json read_json(const fs::path& path) {
  try {
    return json::parse(detail::read_file(path));
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_sidecar(const fs::path& tensor_path, const std::string& kind, const Tensor& t,
                          json extra = json::object()) {
  extra["kind"] = kind;
  extra["dims"] = t.dims;
  write_json(sidecar_path(tensor_path), extra);
}

/// Sidecar contents, or an empty object when there is none.
inline json read_sidecar(const fs::path& tensor_path) {
  const fs::path p = sidecar_path(tensor_path);
  return fs::exists(p) ? read_json(p) : json::object();
}

namespace detail {

inline void expect_rank(const Tensor& t, std::size_t rank, const fs::path& path) {
  if (t.dims.size() != rank)
    throw IoError(path.string() + ": expected rank " + std::to_string(rank) + ", got " +
                  std::to_string(t.dims.size()));
}

inline void expect_kind(const json& side, const std::string& kind, const fs::path& path) {
  if (side.contains("kind") && side["kind"] != kind)
    throw IoError(path.string() + ": sidecar kind is " + side["kind"].dump() + ", expected \"" + kind + "\"");
}

inline Tensor stack_tensor(const CoilStack& s) {
  return {{static_cast<std::uint32_t>(s.coils()), static_cast<std::uint32_t>(s.height()),
           static_cast<std::uint32_t>(s.width())},
          std::vector<cplx>(s.values().begin(), s.values().end())};
}

}  // namespace detail

// ---- typed save/load -------------------------------------------------------

inline void save_image(const fs::path& path, const ComplexImage& img) {
  const Tensor t{{static_cast<std::uint32_t>(img.height()), static_cast<std::uint32_t>(img.width())},
                 std::vector<cplx>(img.values().begin(), img.values().end())};
  write_tensor(path, t);
  write_sidecar(path, "image", t);
}

inline ComplexImage load_image(const fs::path& path) {
  Tensor t = read_tensor(path);
  detail::expect_rank(t, 2, path);
  detail::expect_kind(read_sidecar(path), "image", path);
  try {
    return ComplexImage(t.dims[0], t.dims[1], std::move(t.values));
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void save_kspace(const fs::path& path, const KSpaceGrid& k, json extra = json::object()) {
  const Tensor t = detail::stack_tensor(k);
  write_tensor(path, t);
  write_sidecar(path, "kspace", t, std::move(extra));
}

inline KSpaceGrid load_kspace(const fs::path& path) {
  Tensor t = read_tensor(path);
  detail::expect_rank(t, 3, path);
  detail::expect_kind(read_sidecar(path), "kspace", path);
  try {
    return KSpaceGrid(t.dims[0], t.dims[1], t.dims[2], std::move(t.values));
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void save_smaps(const fs::path& path, const SensitivityMaps& s, json extra = json::object()) {
  const Tensor t = detail::stack_tensor(s);
  write_tensor(path, t);
  write_sidecar(path, "smaps", t, std::move(extra));
}

inline SensitivityMaps load_smaps(const fs::path& path) {
  Tensor t = read_tensor(path);
  detail::expect_rank(t, 3, path);
  detail::expect_kind(read_sidecar(path), "smaps", path);
  try {
    return SensitivityMaps(t.dims[0], t.dims[1], t.dims[2], std::move(t.values));
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void save_mask(const fs::path& path, const SamplingMask& m) {
  Tensor t{{static_cast<std::uint32_t>(m.height()), static_cast<std::uint32_t>(m.width())}, {}};
  t.values.reserve(m.height() * m.width());
  for (std::size_t y = 0; y < m.height(); ++y)
    for (std::size_t x = 0; x < m.width(); ++x) t.values.emplace_back(m.sampled(y, x) ? 1.0 : 0.0, 0.0);
  write_tensor(path, t);
  write_sidecar(path, "mask", t, json{{"R", m.acceleration()}, {"acs", m.acs_lines()}, {"offset", m.offset()}});
}

inline SamplingMask load_mask(const fs::path& path) {
  const Tensor t = read_tensor(path);
  detail::expect_rank(t, 2, path);
  const json side = read_sidecar(path);
  detail::expect_kind(side, "mask", path);
  const std::size_t h = t.dims[0], w = t.dims[1];
  std::vector<std::uint8_t> rows(h, 0);
  for (std::size_t y = 0; y < h; ++y) {
    const bool first = t.values[y * w].real() != 0.0;
    for (std::size_t x = 0; x < w; ++x) {
      if ((t.values[y * w + x].real() != 0.0) != first)
        throw IoError(path.string() + ": row " + std::to_string(y) + " is partially sampled");
    }
    rows[y] = first ? 1 : 0;
  }
  try {
    return SamplingMask(h, w, std::move(rows), side.value("R", 1), side.value("acs", 0), side.value("offset", 0));
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// ---- network checkpoints ---------------------------------------------------

template <class T>
void save_network(const fs::path& dir, const SirenNetwork<T>& net) {
  fs::create_directories(dir);
  json layers = json::array();
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    Tensor w{{static_cast<std::uint32_t>(l.out_dim()), static_cast<std::uint32_t>(l.in_dim())}, {}};
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.values.emplace_back(static_cast<double>(l.weight(r, c)), 0.0);
    Tensor b{{static_cast<std::uint32_t>(l.out_dim()), 1u}, {}};
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) b.values.emplace_back(static_cast<double>(l.bias(r)), 0.0);
    const std::string stem = "layer_" + std::to_string(i);
    write_tensor(dir / (stem + "_weight.cplx"), w);
    write_tensor(dir / (stem + "_bias.cplx"), b);
    layers.push_back(json{{"in", l.in_dim()}, {"out", l.out_dim()}, {"weight", stem + "_weight.cplx"},
                          {"bias", stem + "_bias.cplx"}});
  }
  write_json(dir / "manifest.json", json{{"kind", "siren_checkpoint"},
                                         {"layers", layers},
                                         {"w0", net.w0},
                                         {"hidden_w", net.hidden_w},
                                         {"activation", to_string(net.activation)},
                                         {"seed", net.seed}});
}

template <class T>
SirenNetwork<T> load_network(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  if (m.value("kind", std::string{}) != "siren_checkpoint")
    throw IoError((dir / "manifest.json").string() + ": not a network checkpoint");
  SirenNetwork<T> net;
  try {
    net.w0 = m.at("w0").get<double>();
    net.hidden_w = m.at("hidden_w").get<double>();
    net.activation = activation_from_string(m.at("activation").get<std::string>());
    net.seed = m.at("seed").get<std::uint64_t>();
    for (const json& l : m.at("layers")) {
      const auto in = l.at("in").get<Eigen::Index>(), out = l.at("out").get<Eigen::Index>();
      const Tensor w = read_tensor(dir / l.at("weight").get<std::string>());
      const Tensor b = read_tensor(dir / l.at("bias").get<std::string>());
      if (w.count() != static_cast<std::size_t>(in * out) || b.count() != static_cast<std::size_t>(out))
        throw IoError(dir.string() + ": layer tensor does not match manifest shape");
      DenseLayer<T> layer{Mat<T>(out, in), Vec<T>(out)};
      for (Eigen::Index r = 0; r < out; ++r) {
        for (Eigen::Index c = 0; c < in; ++c)
          layer.weight(r, c) = static_cast<T>(w.values[static_cast<std::size_t>(r * in + c)].real());
        layer.bias(r) = static_cast<T>(b.values[static_cast<std::size_t>(r)].real());
      }
      net.layers.push_back(std::move(layer));
    }
  } catch (const json::exception& e) {
    throw IoError(dir.string() + ": " + e.what());
  }
  net.validate();
  return net;
}

template <class T>
void save_networks(const fs::path& dir, const TrainedNetworks<T>& nets) {
  save_network(dir / "real", nets.real);
  save_network(dir / "imag", nets.imag);
  write_json(dir / "networks.json", json{{"kind", "siren_pair"}, {"data_scale", nets.data_scale}});
}

template <class T>
TrainedNetworks<T> load_networks(const fs::path& dir) {
  const json m = read_json(dir / "networks.json");
  return {load_network<T>(dir / "real"), load_network<T>(dir / "imag"), m.at("data_scale").get<double>()};
}

// ---- GRAPPA kernels -------------------------------------------------------

inline void save_kernel(const fs::path& path, const GrappaKernel& k) {
  k.validate();
  Tensor t{{static_cast<std::uint32_t>(k.coils), static_cast<std::uint32_t>(k.R - 1),
            static_cast<std::uint32_t>(k.coils), static_cast<std::uint32_t>(k.ky_taps),
            static_cast<std::uint32_t>(k.kx_extent)},
           {}};
  for (std::size_t co = 0; co < k.coils; ++co)
    for (int d = 1; d < k.R; ++d)
      for (std::size_t ci = 0; ci < k.coils; ++ci)
        for (int tap = 0; tap < k.ky_taps; ++tap)
          for (int col = 0; col < k.kx_extent; ++col) t.values.push_back(k.at(co, d, ci, tap, col));
  write_tensor(path, t);
  write_sidecar(path, "grappa_kernel", t,
                json{{"R", k.R}, {"kx_extent", k.kx_extent}, {"ky_taps", k.ky_taps}, {"tikhonov", k.tikhonov},
                     {"fit_residual", k.fit_residual}});
}

inline GrappaKernel load_kernel(const fs::path& path) {
  const Tensor t = read_tensor(path);
  detail::expect_rank(t, 5, path);
  const json side = read_sidecar(path);
  detail::expect_kind(side, "grappa_kernel", path);
  GrappaKernel k;
  k.coils = t.dims[0];
  k.R = static_cast<int>(t.dims[1]) + 1;
  k.ky_taps = static_cast<int>(t.dims[3]);
  k.kx_extent = static_cast<int>(t.dims[4]);
  if (t.dims[2] != t.dims[0]) throw IoError(path.string() + ": kernel coil dimensions differ");
  k.tikhonov = side.value("tikhonov", 0.0);
  k.fit_residual = side.value("fit_residual", 0.0);
  k.weights.assign(static_cast<std::size_t>(k.R - 1),
                   CMat::Zero(static_cast<Eigen::Index>(k.sources()), static_cast<Eigen::Index>(k.coils)));
  std::size_t i = 0;
  for (std::size_t co = 0; co < k.coils; ++co)
    for (int d = 1; d < k.R; ++d)
      for (std::size_t ci = 0; ci < k.coils; ++ci)
        for (int tap = 0; tap < k.ky_taps; ++tap)
          for (int col = 0; col < k.kx_extent; ++col) k.at(co, d, ci, tap, col) = t.values[i++];
  try {
    k.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return k;
}

// ---- configuration --------------------------------------------------------

inline json config_to_json(const ReconConfig& c) {
  json j{{"w0", c.w0},
         {"lambda_tv", c.lambda_tv},
         {"layer_count", c.layer_count},
         {"hidden_neurons", c.hidden_neurons},
         {"iterations", c.iterations},
         {"lr", c.lr},
         {"seed", c.seed},
         {"activation", to_string(c.activation)},
         {"kspace_consistency", c.kspace_consistency},
         {"log_every", c.log_every},
         {"hidden_w", c.hidden_w},
         {"beta1", c.beta1},
         {"beta2", c.beta2},
         {"eps", c.eps},
         {"dc_norm", to_string(c.dc_norm)},
         {"precision", to_string(c.precision)}};
  if (c.data_norm) {
    j["data_norm"] = *c.data_norm;
  } else {
    j["data_norm"] = "auto";
  }
  return j;
}

/// Overlays the keys of `j` onto `base`. Unknown keys are rejected.
inline ReconConfig config_from_json(const json& j, ReconConfig base = {}) {
  inrmri::detail::require(j.is_object(), "config: expected a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "w0") base.w0 = v.get<double>();
      else if (key == "lambda_tv") base.lambda_tv = v.get<double>();
      else if (key == "layer_count") base.layer_count = v.get<int>();
      else if (key == "hidden_neurons") base.hidden_neurons = v.get<int>();
      else if (key == "iterations") base.iterations = v.get<int>();
      else if (key == "lr") base.lr = v.get<double>();
      else if (key == "seed") base.seed = v.get<std::uint64_t>();
      else if (key == "activation") base.activation = activation_from_string(v.get<std::string>());
      else if (key == "kspace_consistency") base.kspace_consistency = v.get<bool>();
      else if (key == "log_every") base.log_every = v.get<int>();
      else if (key == "hidden_w") base.hidden_w = v.get<double>();
      else if (key == "beta1") base.beta1 = v.get<double>();
      else if (key == "beta2") base.beta2 = v.get<double>();
      else if (key == "eps") base.eps = v.get<double>();
      else if (key == "dc_norm") base.dc_norm = dc_norm_from_string(v.get<std::string>());
      else if (key == "precision") base.precision = precision_from_string(v.get<std::string>());
      else if (key == "data_norm") {
        if (v.is_string()) {
          inrmri::detail::require(v.get<std::string>() == "auto", "config: data_norm must be a number or \"auto\"");
          base.data_norm.reset();
        } else {
          base.data_norm = v.get<double>();
        }
      } else {
        inrmri::detail::invalid("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::type_error& e) {
    inrmri::detail::invalid(std::string("config: ") + e.what());
  }
  base.validate();
  return base;
}

// ---- tabular outputs ------------------------------------------------------

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string loss_csv(const std::vector<LossRecord>& history) {
  std::string out = "iteration,dc,tv,total\n";
  for (const auto& r : history) {
    out += std::to_string(r.iteration) + "," + format_double(r.loss.dc) + "," + format_double(r.loss.tv) + "," +
           format_double(r.loss.total) + "\n";
  }
  return out;
}

inline void write_loss_csv(const fs::path& path, const std::vector<LossRecord>& history) {
  detail::write_file(path, loss_csv(history));
}

inline json metrics_json(double psnr_db, double ssim_value) {
  return json{{"psnr_db", psnr_db}, {"ssim", ssim_value}};
}

}  // namespace inrmri::io
