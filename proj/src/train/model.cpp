#include "psm/train/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psm/core/errors.hpp"
#include "psm/core/scaling_io.hpp"
#include "psm/nn/checkpoint.hpp"

namespace psm::train {

using nlohmann::json;

Matrix Model::inputs_at(std::span<const double> z, double t, std::span<const double> x0s,
                        std::span<const double> vs) const {
  if (x0s.size() != layout.x0_size() || vs.size() != layout.n_controls) {
    throw ConfigError("model: state/control size mismatch");
  }
  Matrix x(z.size(), layout.input_dim());
  for (std::size_t i = 0; i < z.size(); ++i) {
    x(i, InputLayout::z_col) = z[i] / scaling.z_max;
    x(i, InputLayout::t_col) = t / scaling.t_max;
    std::copy(vs.begin(), vs.end(), x.ptr() + i * x.cols + layout.v_col());
    std::copy(x0s.begin(), x0s.end(), x.ptr() + i * x.cols + layout.x0_col());
  }
  return x;
}

std::vector<double> Model::step_scaled(std::span<const double> x0, std::span<const double> v) const {
  const Matrix y = mlp.forward(params, inputs_at(stations, delta_t, x0, v));
  std::vector<double> out(3 * stations.size());
  for (std::size_t j = 0; j < stations.size(); ++j) {
    for (std::size_t c = 0; c < 3; ++c) out[3 * j + c] = y(j, c);
  }
  return out;
}

std::vector<double> Model::step(std::span<const double> x0, std::span<const double> v) const {
  const auto xs = scale_sensors(scaling, x0);
  const auto vs = scale_controls(scaling, v);
  return unscale_sensors(scaling, step_scaled(xs, vs));
}

StepJacobian step_jacobian(const Model& m, std::span<const double> x0, std::span<const double> v) {
  const std::size_t n = m.stations.size();
  const std::size_t q = m.layout.x0_size();
  const std::size_t p = m.layout.n_controls;
  const std::size_t k = q + p;
  const Matrix base = m.inputs_at(m.stations, m.delta_t, x0, v);
  Matrix x((1 + k) * n, base.cols);
  std::copy_n(base.ptr(), n * base.cols, x.ptr());
  for (std::size_t d = 0; d < k; ++d) {
    const std::size_t col = d < q ? m.layout.x0_col() + d : m.layout.v_col() + (d - q);
    for (std::size_t j = 0; j < n; ++j) x((1 + d) * n + j, col) = 1.0;
  }
  nn::EvalTrace tr;
  m.mlp.forward(m.params, x, k, tr);
  StepJacobian out;
  out.value.resize(q);
  out.a.resize(q, q);
  out.b.resize(q, p);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t row = 3 * j + c;
      out.value[row] = tr.output(j, c);
      for (std::size_t d = 0; d < q; ++d) out.a(row, d) = tr.output((1 + d) * n + j, c);
      for (std::size_t d = 0; d < p; ++d) out.b(row, d) = tr.output((1 + q + d) * n + j, c);
    }
  }
  return out;
}

namespace {

std::filesystem::path stem_of(const std::filesystem::path& path) {
  auto ext = path.extension();
  if (ext == ".psmw" || ext == ".json") return path.parent_path() / path.stem();
  return path;
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& stem_in) {
  const auto stem = stem_of(stem_in);
  nn::Checkpoint ck;
  ck.spec = model.mlp.spec();
  ck.params = model.params;
  nn::save_checkpoint(ck, stem.string() + ".psmw");
  json j;
  j["weights"] = stem.filename().string() + ".psmw";
  j["scaling"] = json::parse(dump_scaling(model.scaling));
  j["n_controls"] = model.layout.n_controls;
  j["stations"] = model.stations;
  j["delta_t"] = model.delta_t;
  std::ofstream out(stem.string() + ".json");
  if (!out) throw IoError("cannot write " + stem.string() + ".json");
  out << j.dump(2) << '\n';
}

Model load_model(const std::filesystem::path& path) {
  const auto stem = stem_of(path);
  std::ifstream in(stem.string() + ".json");
  if (!in) throw IoError("cannot open " + stem.string() + ".json");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw IoError(stem.string() + ".json: " + e.what());
  }
  auto ck = nn::load_checkpoint(stem.parent_path() / j.at("weights").get<std::string>());
  InputLayout layout;
  layout.n_controls = j.at("n_controls").get<std::size_t>();
  auto stations = j.at("stations").get<std::vector<double>>();
  layout.n_stations = stations.size();
  if (ck.spec.input_dim != layout.input_dim()) throw IoError(stem.string() + ": layout/weights mismatch");
  return Model{nn::Mlp(ck.spec), std::move(ck.params), parse_scaling(j.at("scaling").dump()), layout,
               std::move(stations), j.at("delta_t").get<double>()};
}

}  // namespace psm::train
