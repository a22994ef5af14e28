#include "stft/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace stft {

static_assert(std::endian::native == std::endian::little, "tensor files assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'T', 'F', 'T'};
constexpr std::int64_t kMaxElements = std::int64_t(1) << 31;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw IoError("tensor file " + path.string() + ": " + what);
}

}  // namespace

template <typename T>
void save_tensor(const std::filesystem::path& path, const Tensor<T>& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out.write(kMagic, 4);
    const std::uint8_t dtype = static_cast<std::uint8_t>(dtype_of<T>());
    const std::uint8_t rank = static_cast<std::uint8_t>(t.rank());
    out.put(static_cast<char>(dtype));
    out.put(static_cast<char>(rank));
    for (int i = 0; i < t.rank(); ++i) {
        const std::int64_t d = t.dim(i);
        if (d > 0xffffffffLL) fail(path, "dimension exceeds u32");
        const std::uint32_t d32 = static_cast<std::uint32_t>(d);
        out.write(reinterpret_cast<const char*>(&d32), 4);
    }
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.numel() * static_cast<std::int64_t>(sizeof(T))));
    if (!out) fail(path, "write failed");
}

template <typename T>
Tensor<T> load_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) fail(path, "bad magic");
    const int dtype = in.get();
    const int rank = in.get();
    if (dtype == std::ifstream::traits_type::eof() || rank == std::ifstream::traits_type::eof())
        fail(path, "truncated header");
    if (dtype != static_cast<int>(dtype_of<T>()))
        fail(path, "dtype code " + std::to_string(dtype) + " does not match requested type");
    if (rank > 8) fail(path, "rank " + std::to_string(rank) + " out of range");
    Shape shape(static_cast<std::size_t>(rank));
    std::int64_t numel = 1;
    for (int i = 0; i < rank; ++i) {
        std::uint32_t d32 = 0;
        in.read(reinterpret_cast<char*>(&d32), 4);
        if (!in) fail(path, "truncated dims");
        if (d32 == 0) fail(path, "zero dimension");
        shape[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(d32);
        numel *= static_cast<std::int64_t>(d32);
        if (numel > kMaxElements) fail(path, "dim overflow");
    }
    Tensor<T> t(shape);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(numel * static_cast<std::int64_t>(sizeof(T))));
    if (!in || in.gcount() != static_cast<std::streamsize>(numel * static_cast<std::int64_t>(sizeof(T))))
        fail(path, "truncated payload");
    in.peek();
    if (!in.eof()) fail(path, "trailing bytes after payload");
    return t;
}

template void save_tensor<float>(const std::filesystem::path&, const Tensor<float>&);
template void save_tensor<double>(const std::filesystem::path&, const Tensor<double>&);
template Tensor<float> load_tensor<float>(const std::filesystem::path&);
template Tensor<double> load_tensor<double>(const std::filesystem::path&);

}  // namespace stft
