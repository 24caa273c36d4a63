#include "derwent/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "derwent/error.hpp"

namespace derwent {
namespace {

constexpr std::array<char, 4> kMagic = {'D', 'R', 'W', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = std::bit_cast<U>(value);
  char bytes[sizeof(U)];
  for (std::size_t k = 0; k < sizeof(U); ++k) {
    bytes[k] = static_cast<char>(bits & 0xFF);
    bits >>= 8;
  }
  out.write(bytes, sizeof(U));
}

template <typename T>
T get(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw FormatError("checkpoint: truncated file");
  }
  U bits = 0;
  for (std::size_t k = sizeof(U); k-- > 0;) bits = (bits << 8) | bytes[k];
  return std::bit_cast<T>(bits);
}

struct NamedArray {
  std::string name;
  Matrix* matrix;
};

std::vector<NamedArray> arrays_of(TrainState& state) {
  std::vector<NamedArray> out;
  state.params.for_each([&](std::string_view name, Matrix& m, ParamGroup) {
    out.push_back({"param/" + std::string(name), &m});
  });
  state.optimizer.velocity.for_each([&](std::string_view name, Matrix& m, ParamGroup) {
    out.push_back({"velocity/" + std::string(name), &m});
  });
  return out;
}

}  // namespace

void write_checkpoint(std::ostream& out, const TrainState& state) {
  TrainState copy = state;
  const auto arrays = arrays_of(copy);
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::int32_t>(out, state.epoch);
  put<std::uint64_t>(out, state.params.dims.d_in);
  put<std::uint64_t>(out, state.params.dims.embed);
  put<std::uint64_t>(out, state.params.dims.lstm_hidden);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(arrays.size()));
  for (const NamedArray& a : arrays) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.name.size()));
    out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    put<std::uint64_t>(out, a.matrix->rows());
    put<std::uint64_t>(out, a.matrix->cols());
    for (double v : a.matrix->values()) put<double>(out, v);
  }
  if (!out) throw Error("checkpoint: write failed");
}

TrainState read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError("checkpoint: bad magic bytes");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  TrainState state;
  state.epoch = get<std::int32_t>(in);
  if (state.epoch < 0) throw FormatError("checkpoint: negative epoch");
  NetDims dims;
  dims.d_in = get<std::uint64_t>(in);
  dims.embed = get<std::uint64_t>(in);
  dims.lstm_hidden = get<std::uint64_t>(in);
  constexpr std::uint64_t kMaxDim = 1u << 20;
  if (dims.d_in == 0 || dims.embed == 0 || dims.lstm_hidden == 0 || dims.d_in > kMaxDim ||
      dims.embed > kMaxDim || dims.lstm_hidden > kMaxDim) {
    throw FormatError("checkpoint: implausible dimensions");
  }
  state.params = init_params(0, dims).zeros_like();
  state.optimizer = make_optimizer_state(state.params);
  const auto arrays = arrays_of(state);
  const auto count = get<std::uint32_t>(in);
  if (count != arrays.size()) {
    throw FormatError("checkpoint: expected " + std::to_string(arrays.size()) + " arrays, found " +
                      std::to_string(count));
  }
  for (const NamedArray& a : arrays) {
    const auto len = get<std::uint32_t>(in);
    if (len > 256) throw FormatError("checkpoint: array name too long");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw FormatError("checkpoint: truncated file");
    if (name != a.name) {
      throw FormatError("checkpoint: expected array '" + a.name + "', found '" + name + "'");
    }
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (rows != a.matrix->rows() || cols != a.matrix->cols()) {
      throw FormatError("checkpoint: array '" + name + "' has the wrong shape");
    }
    for (double& v : a.matrix->values()) v = get<double>(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("checkpoint: trailing bytes");
  }
  return state;
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  write_checkpoint(out, state);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace derwent
