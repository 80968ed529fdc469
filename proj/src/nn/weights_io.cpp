#include "meshboost/nn/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace meshboost::nn {

namespace {

constexpr char kMagic[4] = {'W', '3', 'B', 'W'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; big-endian hosts are unsupported");

template <typename T>
void write_pod(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ModelError(std::string("weight file truncated while reading ") + what);
    return value;
}

} // namespace

void save_weights(const std::string& path, const WeightFile& weights) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open weight file for writing: " + path);
    out.write(kMagic, 4);
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint64_t>(weights.descriptor.size()));
    out.write(weights.descriptor.data(), static_cast<std::streamsize>(weights.descriptor.size()));
    write_pod(out, static_cast<std::uint64_t>(weights.tensors.size()));
    for (const auto& [name, tensor] : weights.tensors) {
        write_pod(out, static_cast<std::uint64_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod(out, static_cast<std::uint32_t>(tensor.shape.size()));
        for (int d : tensor.shape) write_pod(out, static_cast<std::uint64_t>(d));
        out.write(reinterpret_cast<const char*>(tensor.data.data()),
                  static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
    }
    if (!out) throw IoError("failed writing weight file: " + path);
}

WeightFile load_weights(const std::string& path, const std::string& expected_descriptor) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open weight file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ModelError("not a weight file (bad magic): " + path);
    const auto version = read_pod<std::uint32_t>(in, "version");
    if (version != kVersion)
        throw ModelError("unsupported weight file version " + std::to_string(version) + ": " + path);

    WeightFile wf;
    const auto desc_len = read_pod<std::uint64_t>(in, "descriptor length");
    if (desc_len > (1ull << 24)) throw ModelError("implausible descriptor length: " + path);
    wf.descriptor.resize(desc_len);
    in.read(wf.descriptor.data(), static_cast<std::streamsize>(desc_len));
    if (!in) throw ModelError("weight file truncated while reading descriptor: " + path);

    const auto count = read_pod<std::uint64_t>(in, "tensor count");
    for (std::uint64_t t = 0; t < count; ++t) {
        const auto name_len = read_pod<std::uint64_t>(in, "tensor name length");
        if (name_len > (1ull << 16)) throw ModelError("implausible tensor name length: " + path);
        std::string name(name_len, '\0');
        in.read(name.data(), static_cast<std::streamsize>(name_len));
        if (!in) throw ModelError("weight file truncated while reading tensor name: " + path);
        const auto ndim = read_pod<std::uint32_t>(in, "tensor rank");
        if (ndim > 8) throw ModelError("implausible tensor rank: " + path);
        std::vector<int> shape(ndim);
        std::int64_t numel = 1;
        for (auto& d : shape) {
            const auto dim = read_pod<std::uint64_t>(in, "tensor dimension");
            if (dim > (1ull << 31)) throw ModelError("implausible tensor dimension: " + path);
            d = static_cast<int>(dim);
            numel *= d;
        }
        TensorT<float> tensor;
        tensor.shape = shape;
        tensor.data.resize(static_cast<std::size_t>(numel));
        in.read(reinterpret_cast<char*>(tensor.data.data()),
                static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
        if (!in) throw ModelError("weight file truncated while reading tensor data: " + path);
        wf.tensors.emplace(std::move(name), std::move(tensor));
    }
    if (!expected_descriptor.empty() && wf.descriptor != expected_descriptor)
        throw ModelError("architecture descriptor mismatch in " + path);
    return wf;
}

} // namespace meshboost::nn
