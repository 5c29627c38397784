#include <fstream>
#include <iomanip>
#include <limits>

#include "psm/core/binary_io.hpp"
#include "psm/core/errors.hpp"
#include "psm/solver/record.hpp"

namespace psm::solver {

namespace {
constexpr std::uint16_t kRecordVersion = 1;
}

void write_record(const SimulationRecord& rec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write record " + path.string());
  BinaryWriter w(out);
  const std::size_t n = rec.grid_z.size();
  const std::size_t q = rec.stations.size();
  const std::size_t p = rec.controls.empty() ? 0 : rec.controls.front().size();
  w.put_raw("PSMD", 4);
  w.put<std::uint16_t>(kRecordVersion);
  w.put<std::uint64_t>(rec.scenario_hash);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(n));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(q));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(rec.n_times()));
  w.put<double>(rec.delta_t);
  w.put_doubles(rec.grid_z);
  w.put_doubles(rec.stations);
  for (std::size_t k = 0; k < rec.n_times(); ++k) {
    const auto& s = rec.states[k];
    w.put<double>(rec.times[k]);
    w.put_doubles(rec.controls[k]);
    w.put_doubles(s.p);
    w.put_doubles(s.u);
    w.put_doubles(s.T);
    w.put_doubles(rec.sensors[k]);
    w.put<std::uint8_t>(s.face_mass_flow.size() == n + 1 ? 1 : 0);
    if (s.face_mass_flow.size() == n + 1) w.put_doubles(s.face_mass_flow);
  }
  if (!out) throw IoError("write failed for record " + path.string());
}

SimulationRecord read_record(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open record " + path.string());
  BinaryReader r(in, path.string());
  r.expect_magic("PSMD");
  const auto version = r.get<std::uint16_t>();
  if (version != kRecordVersion) throw IoError(path.string() + ": unsupported record version");
  SimulationRecord rec;
  rec.scenario_hash = r.get<std::uint64_t>();
  const std::size_t n = r.get<std::uint32_t>();
  const std::size_t q = r.get<std::uint32_t>();
  const std::size_t p = r.get<std::uint32_t>();
  const std::size_t nt = r.get<std::uint32_t>();
  rec.delta_t = r.get<double>();
  rec.grid_z = r.get_doubles(n);
  rec.stations = r.get_doubles(q);
  for (std::size_t k = 0; k < nt; ++k) {
    rec.times.push_back(r.get<double>());
    rec.controls.push_back(r.get_doubles(p));
    FieldState s;
    s.z = rec.grid_z;
    s.p = r.get_doubles(n);
    s.u = r.get_doubles(n);
    s.T = r.get_doubles(n);
    rec.sensors.push_back(r.get_doubles(3 * q));
    if (r.get<std::uint8_t>() != 0) s.face_mass_flow = r.get_doubles(n + 1);
    rec.states.push_back(std::move(s));
  }
  return rec;
}

void write_record_csv(const SimulationRecord& rec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  const std::size_t p = rec.controls.empty() ? 0 : rec.controls.front().size();
  out << "time,z,p,u,T";
  for (std::size_t j = 0; j < p; ++j) out << ",v" << j;
  out << '\n';
  for (std::size_t k = 0; k < rec.n_times(); ++k) {
    const auto& s = rec.states[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << rec.times[k] << ',' << s.z[i] << ',' << s.p[i] << ',' << s.u[i] << ',' << s.T[i];
      for (double v : rec.controls[k]) out << ',' << v;
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace psm::solver
