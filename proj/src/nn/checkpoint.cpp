#include "psm/nn/checkpoint.hpp"

#include <fstream>

#include "psm/core/binary_io.hpp"
#include "psm/core/errors.hpp"

namespace psm::nn {

namespace {
constexpr std::uint16_t kCheckpointVersion = 1;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  const std::size_t n = Mlp(c.spec).n_params();
  if (c.params.size() != n || (c.has_moments && (c.m.size() != n || c.v.size() != n))) {
    throw ConfigError("checkpoint: parameter count does not match the network spec");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  BinaryWriter w(out);
  w.put_raw("PSMW", 4);
  w.put<std::uint16_t>(kCheckpointVersion);
  w.put<std::uint64_t>(c.spec.fingerprint());
  w.put<std::uint64_t>(c.spec.input_dim);
  w.put<std::uint64_t>(c.spec.head_width);
  w.put<std::uint64_t>(c.spec.head_depth);
  w.put<std::uint64_t>(c.spec.inter_width);
  w.put<std::uint64_t>(c.spec.tail_width);
  w.put<std::uint8_t>(c.spec.activation == Activation::tanh ? 0 : 1);
  w.put<std::uint64_t>(c.params.size());
  w.put_doubles(c.params);
  w.put<std::uint8_t>(c.has_moments ? 1 : 0);
  if (c.has_moments) {
    w.put<std::uint64_t>(c.adam_steps);
    w.put_doubles(c.m);
    w.put_doubles(c.v);
  }
  if (!out) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  BinaryReader r(in, path.string());
  r.expect_magic("PSMW");
  if (r.get<std::uint16_t>() != kCheckpointVersion) {
    throw IoError(path.string() + ": unsupported checkpoint version");
  }
  Checkpoint c;
  const auto fingerprint = r.get<std::uint64_t>();
  c.spec.input_dim = r.get<std::uint64_t>();
  c.spec.head_width = r.get<std::uint64_t>();
  c.spec.head_depth = r.get<std::uint64_t>();
  c.spec.inter_width = r.get<std::uint64_t>();
  c.spec.tail_width = r.get<std::uint64_t>();
  c.spec.activation = r.get<std::uint8_t>() == 0 ? Activation::tanh : Activation::identity;
  if (c.spec.fingerprint() != fingerprint) throw IoError(path.string() + ": spec fingerprint mismatch");
  const auto n = r.get<std::uint64_t>();
  if (n != Mlp(c.spec).n_params()) throw IoError(path.string() + ": parameter count mismatch");
  c.params = r.get_doubles(n);
  c.has_moments = r.get<std::uint8_t>() != 0;
  if (c.has_moments) {
    c.adam_steps = r.get<std::uint64_t>();
    c.m = r.get_doubles(n);
    c.v = r.get_doubles(n);
  }
  return c;
}

}  // namespace psm::nn
