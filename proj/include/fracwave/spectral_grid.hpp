#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace fracwave {

using cplx = std::complex<double>;

enum class ExecPolicy { Sequential, Parallel };

// Periodic box [-L/2, L/2)^dim with n points per side.
struct BoxGeometry {
    int dim = 1;
    int n = 64;
    double L = 1.0;

    void validate() const;
    std::size_t size() const;          // n^dim
    std::size_t spectral_size() const;  // n^(dim-1) * (n/2 + 1)
    double dx() const { return L / n; }
    double cell_volume() const;
    double volume() const;
    double coord(int i) const { return -0.5 * L + i * dx(); }
    double max_time_window(double alpha) const;  // largest t with t^(alpha/2) <= L/8

    bool operator==(const BoxGeometry&) const = default;
};

struct GridFunction {
    BoxGeometry geometry;
    std::vector<double> samples;

    static GridFunction zeros(const BoxGeometry& g);
    // fn(x, y, z); coordinates beyond dim are passed as 0.
    static GridFunction from(const BoxGeometry& g, const std::function<double(double, double, double)>& fn);
    static GridFunction from_radial(const BoxGeometry& g, const std::function<double(double)>& fn);
};

enum class MultiplierFamily {
    E1,      // E_{alpha,1}(-|xi|^2 t^alpha)
    E2,      // t E_{alpha,2}(-|xi|^2 t^alpha)
    Ealpha,  // E_{alpha,alpha}(-|xi|^2 t^alpha)
};

const char* family_name(MultiplierFamily f);
MultiplierFamily family_from_name(const std::string& s);

struct MultiplierKind {
    MultiplierFamily family = MultiplierFamily::E1;
    double alpha = 1.5;
    double t = 0.0;
};

double family_beta(MultiplierFamily f, double alpha);

// Real-to-complex FFT engine on a fixed geometry plus the grouping of
// modes into classes of equal |xi|^2. Thread-safe for concurrent calls.
class SpectralGrid {
public:
    explicit SpectralGrid(const BoxGeometry& g);
    ~SpectralGrid();
    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    const BoxGeometry& geometry() const { return geom_; }
    std::size_t spectral_size() const { return geom_.spectral_size(); }

    // Unnormalized forward transform; inverse divides by n^dim.
    void forward(const double* in, cplx* out) const;
    void inverse(const cplx* in, double* out) const;
    std::vector<cplx> forward(const GridFunction& f) const;
    GridFunction inverse(const std::vector<cplx>& spec) const;

    // Class index of every spectral mode and the |xi|^2 of every class.
    const std::vector<std::uint32_t>& mode_class() const { return mode_class_; }
    const std::vector<double>& class_mu() const { return class_mu_; }
    // Hermitian multiplicity of each stored mode (1 or 2).
    const std::vector<double>& mode_weight() const { return mode_weight_; }

    // sqrt(cell_volume / n^dim * sum multiplicity |f_hat|^2)
    double spectral_l2(const std::vector<cplx>& spec) const;

private:
    struct Plans;
    BoxGeometry geom_;
    std::unique_ptr<Plans> plans_;
    std::vector<std::uint32_t> mode_class_;
    std::vector<double> class_mu_;
    std::vector<double> mode_weight_;
};

// Per-mode kernels. The Parallel variants split the mode range across
// OpenMP threads; every mode is computed by the same arithmetic, so the
// result is bitwise identical to the Sequential one.
namespace kernels {
void scale_by_class(const cplx* in, cplx* out, const std::uint32_t* cls, const double* factor, std::size_t n,
                    ExecPolicy policy);
void accumulate_by_class(cplx* acc, const cplx* src, const std::uint32_t* cls, const double* weight, std::size_t n,
                         ExecPolicy policy);
}  // namespace kernels

// Multiplier value of every |xi|^2 class.
std::vector<double> class_multipliers(const SpectralGrid& grid, const MultiplierKind& kind);

GridFunction apply_multiplier(const MultiplierKind& kind, const GridFunction& f,
                              ExecPolicy policy = ExecPolicy::Parallel);
GridFunction apply_multiplier(const SpectralGrid& grid, const MultiplierKind& kind, const GridFunction& f,
                              ExecPolicy policy = ExecPolicy::Parallel);

// Physical-space kernel: the multiplier applied to a unit-mass discrete delta
// at the origin.
GridFunction realize_kernel(const MultiplierKind& kind, const BoxGeometry& g);

inline constexpr double p_infinity = std::numeric_limits<double>::infinity();

double lp_norm(const GridFunction& f, double p);
double sobolev_neg_norm(const GridFunction& f, double order, double p_index);

// Binary form: one JSON header line {"dim","n","L"}, then n^dim float64 LE.
void write_grid_binary(const std::filesystem::path& path, const GridFunction& f);
GridFunction read_grid_binary(const std::filesystem::path& path);
void write_grid_csv(const std::filesystem::path& path, const GridFunction& f);

}  // namespace fracwave
