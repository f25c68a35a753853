#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <string>

#include <json.hpp>

#include "fracwave/error.hpp"
#include "fracwave/spectral_grid.hpp"

namespace fracwave {

namespace {

void put_le(std::ostream& os, double v)
{
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    char bytes[8];
    for (int i = 0; i < 8; ++i)
        bytes[i] = static_cast<char>((u >> (8 * i)) & 0xffu);
    os.write(bytes, 8);
}

double get_le(const unsigned char* bytes)
{
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i)
        u |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, sizeof v);
    return v;
}

}  // namespace

void write_grid_binary(const std::filesystem::path& path, const GridFunction& f)
{
    f.geometry.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
    nlohmann::json header{{"dim", f.geometry.dim}, {"n", f.geometry.n}, {"L", f.geometry.L}};
    os << header.dump() << '\n';
    for (double v : f.samples)
        put_le(os, v);
    if (!os)
        throw Error(Errc::IoError, "write failed for " + path.string());
}

GridFunction read_grid_binary(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(Errc::IoError, "cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    BoxGeometry g;
    try {
        const auto header = nlohmann::json::parse(line);
        g.dim = header.at("dim").get<int>();
        g.n = header.at("n").get<int>();
        g.L = header.at("L").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::IoError, "bad grid header in " + path.string() + ": " + e.what());
    }
    GridFunction f = GridFunction::zeros(g);
    std::vector<unsigned char> raw(f.samples.size() * 8);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (is.gcount() != static_cast<std::streamsize>(raw.size()))
        throw Error(Errc::IoError, "truncated grid payload in " + path.string());
    for (std::size_t i = 0; i < f.samples.size(); ++i)
        f.samples[i] = get_le(&raw[8 * i]);
    return f;
}

void write_grid_csv(const std::filesystem::path& path, const GridFunction& f)
{
    if (f.geometry.dim != 1)
        throw Error(Errc::GeometryMismatch, "CSV export is defined for one-dimensional grids");
    std::ofstream os(path);
    if (!os)
        throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
    os << "x,value\n" << std::setprecision(17);
    for (int i = 0; i < f.geometry.n; ++i)
        os << f.geometry.coord(i) << ',' << f.samples[static_cast<std::size_t>(i)] << '\n';
}

}  // namespace fracwave
