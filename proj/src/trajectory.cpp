#include "hjdc/trajectory.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace hjdc {

static_assert(std::endian::native == std::endian::little,
              "HJT1 I/O assumes a little-endian host");

namespace {
constexpr char kMagic[8] = {'H', 'J', 'T', 'R', 'A', 'J', 'B', '1'};
}

TrajectoryBundle::TrajectoryBundle(int d_, int N_, int M_, double h_, double t0_)
    : d(d_), N(N_), M(M_), h(h_), t0(t0_),
      states(static_cast<std::size_t>(M_ + 1) * N_ * 2 * d_, 0.0) {}

bool TrajectoryBundle::all_finite() const {
  for (double v : states)
    if (!std::isfinite(v)) return false;
  return true;
}

void write_trajectories(const TrajectoryBundle& b, const std::filesystem::path& path) {
  nlohmann::json header = {{"d", b.d},
                           {"N", b.N},
                           {"M", b.M},
                           {"h", b.h},
                           {"t0", b.t0},
                           {"model_id", b.model_id},
                           {"integrator_id", b.integrator_id},
                           {"seed", b.seed}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const auto len = static_cast<std::uint32_t>(text.size());
  out.write(kMagic, 8);
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(b.states.data()),
            static_cast<std::streamsize>(b.states.size() * sizeof(double)));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

TrajectoryBundle read_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[8];
  std::uint32_t len = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&len), 4);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("'" + path.string() + "' is not an HJT1 trajectory file");
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw IoError("truncated HJT1 header in '" + path.string() + "'");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad HJT1 header in '" + path.string() + "': " + e.what());
  }
  TrajectoryBundle b;
  try {
    b = TrajectoryBundle(header.at("d").get<int>(), header.at("N").get<int>(),
                         header.at("M").get<int>(), header.at("h").get<double>(),
                         header.at("t0").get<double>());
    b.model_id = header.at("model_id").get<std::string>();
    b.integrator_id = header.at("integrator_id").get<std::string>();
    b.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("incomplete HJT1 header in '" + path.string() + "': " + e.what());
  }
  in.read(reinterpret_cast<char*>(b.states.data()),
          static_cast<std::streamsize>(b.states.size() * sizeof(double)));
  if (!in) throw IoError("truncated HJT1 payload in '" + path.string() + "'");
  if (in.peek() != std::ifstream::traits_type::eof())
    throw IoError("trailing bytes after HJT1 payload in '" + path.string() + "'");
  return b;
}

}  // namespace hjdc
