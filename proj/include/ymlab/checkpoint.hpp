#pragma once

// Versioned binary checkpoints.  Layout (little-endian throughout):
//   magic "YMLB" | u32 version | u8 kind (0 real, 1 complex) | u8 n | u8 rank
//   | u8 mode (0 ym, 1 hym) | u32 sizes[n] | f64 spacing
//   | twist: per axis r*r fiber entries (f64, or f64 re,im pairs)
//   | i32 chern[pair_count]
//   | f64 t | f64 dt | u64 accepted | u64 rejected | u64 samples
//   | u64 config_len | config text bytes
//   | payload scalars (f64, or re,im pairs) in storage index order:
//       ym:  connection field
//       hym: metric field H, then reference metric H0
// Roundtrips are bit exact.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ymlab/field.hpp"

namespace ymlab {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace ckpt_detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format requires a little-endian host");

inline void put_bytes(std::string& buf, const void* p, size_t n) {
  buf.append(static_cast<const char*>(p), n);
}
template <typename T>
void put(std::string& buf, T v) {
  put_bytes(buf, &v, sizeof(T));
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  void bytes(void* p, size_t n) {
    if (pos + n > buf.size())
      throw CheckpointError("checkpoint truncated or corrupt");
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  template <typename T>
  T get() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
};

template <typename S>
void put_scalars(std::string& buf, const std::vector<S>& v) {
  if constexpr (scalar_traits<S>::is_complex) {
    for (const S& x : v) {
      put(buf, x.real());
      put(buf, x.imag());
    }
  } else {
    for (const S& x : v) put(buf, x);
  }
}

template <typename S>
void get_scalars(Reader& r, std::vector<S>& v) {
  if constexpr (scalar_traits<S>::is_complex) {
    for (S& x : v) {
      const double re = r.get<double>();
      const double im = r.get<double>();
      x = Cplx(re, im);
    }
  } else {
    for (S& x : v) x = r.get<double>();
  }
}

}  // namespace ckpt_detail

struct CheckpointHeader {
  bool is_complex = true;
  int n = 0;
  int rank = 1;
  int mode = 0;  // 0 ym, 1 hym
  std::vector<int> sizes;
  double spacing = 0.0;
  double t = 0.0;
  double dt = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t samples = 0;
  std::string config_text;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename S>
std::string encode_checkpoint(const CheckpointHeader& hdr,
                              const TwistCocycle<S>& twist,
                              const std::vector<const std::vector<S>*>& payloads) {
  std::string buf;
  buf.reserve(256);
  ckpt_detail::put_bytes(buf, "YMLB", 4);
  ckpt_detail::put<std::uint32_t>(buf, kCheckpointVersion);
  ckpt_detail::put<std::uint8_t>(buf, scalar_traits<S>::is_complex ? 1 : 0);
  ckpt_detail::put<std::uint8_t>(buf, static_cast<std::uint8_t>(hdr.n));
  ckpt_detail::put<std::uint8_t>(buf, static_cast<std::uint8_t>(hdr.rank));
  ckpt_detail::put<std::uint8_t>(buf, static_cast<std::uint8_t>(hdr.mode));
  for (int mu = 0; mu < hdr.n; ++mu)
    ckpt_detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(hdr.sizes[mu]));
  ckpt_detail::put(buf, hdr.spacing);
  for (int mu = 0; mu < hdr.n; ++mu) {
    std::vector<S> entries(static_cast<size_t>(hdr.rank) * hdr.rank);
    for (int i = 0; i < hdr.rank; ++i)
      for (int j = 0; j < hdr.rank; ++j)
        entries[static_cast<size_t>(i) * hdr.rank + j] = twist.g[mu](i, j);
    ckpt_detail::put_scalars(buf, entries);
  }
  for (int mu = 0; mu < hdr.n; ++mu)
    for (int nu = mu + 1; nu < hdr.n; ++nu)
      ckpt_detail::put<std::int32_t>(buf, twist.chern[mu][nu]);
  ckpt_detail::put(buf, hdr.t);
  ckpt_detail::put(buf, hdr.dt);
  ckpt_detail::put(buf, hdr.accepted);
  ckpt_detail::put(buf, hdr.rejected);
  ckpt_detail::put(buf, hdr.samples);
  ckpt_detail::put<std::uint64_t>(buf, hdr.config_text.size());
  buf += hdr.config_text;
  for (const auto* payload : payloads) ckpt_detail::put_scalars(buf, *payload);
  return buf;
}

/// Parsed header plus the twist and raw payload blocks.
template <typename S>
struct DecodedCheckpoint {
  CheckpointHeader hdr;
  TwistCocycle<S> twist;
  std::vector<std::vector<S>> payloads;
};

inline CheckpointHeader peek_checkpoint_header(const std::string& buf,
                                               bool* is_complex) {
  ckpt_detail::Reader r{buf};
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "YMLB", 4) != 0)
    throw CheckpointError("not a checkpoint file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  CheckpointHeader hdr;
  hdr.is_complex = r.get<std::uint8_t>() != 0;
  if (is_complex) *is_complex = hdr.is_complex;
  hdr.n = r.get<std::uint8_t>();
  hdr.rank = r.get<std::uint8_t>();
  hdr.mode = r.get<std::uint8_t>();
  return hdr;
}

template <typename S>
DecodedCheckpoint<S> decode_checkpoint(const std::string& buf,
                                       const std::vector<size_t>& payload_sizes_hint = {}) {
  ckpt_detail::Reader r{buf};
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "YMLB", 4) != 0)
    throw CheckpointError("not a checkpoint file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  DecodedCheckpoint<S> out;
  const bool is_complex = r.get<std::uint8_t>() != 0;
  if (is_complex != scalar_traits<S>::is_complex)
    throw CheckpointError("checkpoint scalar kind mismatch");
  out.hdr.is_complex = is_complex;
  out.hdr.n = r.get<std::uint8_t>();
  out.hdr.rank = r.get<std::uint8_t>();
  out.hdr.mode = r.get<std::uint8_t>();
  if (out.hdr.n < 2 || out.hdr.n > kMaxDim || out.hdr.rank < 1 ||
      out.hdr.rank > kMaxRank)
    throw CheckpointError("checkpoint header out of range");
  out.hdr.sizes.resize(out.hdr.n);
  for (int mu = 0; mu < out.hdr.n; ++mu)
    out.hdr.sizes[mu] = static_cast<int>(r.get<std::uint32_t>());
  out.hdr.spacing = r.get<double>();

  out.twist.rank = out.hdr.rank;
  out.twist.dim = out.hdr.n;
  out.twist.g.assign(out.hdr.n, SquareMatrix<S>(out.hdr.rank));
  for (int mu = 0; mu < out.hdr.n; ++mu) {
    std::vector<S> entries(static_cast<size_t>(out.hdr.rank) * out.hdr.rank);
    ckpt_detail::get_scalars(r, entries);
    for (int i = 0; i < out.hdr.rank; ++i)
      for (int j = 0; j < out.hdr.rank; ++j)
        out.twist.g[mu](i, j) = entries[static_cast<size_t>(i) * out.hdr.rank + j];
  }
  for (auto& row : out.twist.chern) row.fill(0);
  for (int mu = 0; mu < out.hdr.n; ++mu)
    for (int nu = mu + 1; nu < out.hdr.n; ++nu) {
      const int k = static_cast<int>(r.get<std::int32_t>());
      out.twist.chern[mu][nu] = k;
      out.twist.chern[nu][mu] = -k;
    }
  out.hdr.t = r.get<double>();
  out.hdr.dt = r.get<double>();
  out.hdr.accepted = r.get<std::uint64_t>();
  out.hdr.rejected = r.get<std::uint64_t>();
  out.hdr.samples = r.get<std::uint64_t>();
  const auto cfg_len = r.get<std::uint64_t>();
  if (r.pos + cfg_len > buf.size())
    throw CheckpointError("checkpoint truncated in config block");
  out.hdr.config_text.assign(buf, r.pos, cfg_len);
  r.pos += cfg_len;

  // remaining bytes are the payload blocks
  const size_t scalar_bytes = scalar_traits<S>::is_complex ? 16 : 8;
  if ((buf.size() - r.pos) % scalar_bytes != 0)
    throw CheckpointError("checkpoint payload is not scalar aligned");
  size_t remaining = (buf.size() - r.pos) / scalar_bytes;
  if (!payload_sizes_hint.empty()) {
    size_t total = 0;
    for (size_t s : payload_sizes_hint) total += s;
    if (total != remaining)
      throw CheckpointError("checkpoint payload size mismatch");
    for (size_t s : payload_sizes_hint) {
      std::vector<S> block(s);
      ckpt_detail::get_scalars(r, block);
      out.payloads.push_back(std::move(block));
    }
  } else {
    std::vector<S> block(remaining);
    ckpt_detail::get_scalars(r, block);
    out.payloads.push_back(std::move(block));
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return buf;
}

}  // namespace ymlab
