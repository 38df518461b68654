#include "srsim/cloud.hpp"

#include "srsim/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace srsim {

namespace {
constexpr double two_pi = 6.283185307179586476925286766559;
}

void CloudGeometry::validate() const {
    if (!(peak_density > 0.0))
        throw std::invalid_argument("cloud geometry: peak density must be > 0");
    if (!(transverse_radius > 0.0) || !(longitudinal_radius > 0.0))
        throw std::invalid_argument("cloud geometry: Gaussian radii must be > 0");
    if (exclusion_radius) {
        if (*exclusion_radius < 0.0)
            throw std::invalid_argument("cloud geometry: exclusion radius must be >= 0");
        const double occupancy = std::pow(*exclusion_radius, 3) * peak_density;
        if (occupancy > 0.1)
            throw std::invalid_argument(
                "cloud geometry: exclusion_radius^3 * n0 exceeds 0.1; rejection "
                "sampling would not terminate for this density");
    }
}

long long expected_atom_number(const CloudGeometry& geometry) {
    if (!(geometry.peak_density >= 0.0))
        throw std::invalid_argument("expected_atom_number: negative density");
    const double mean = geometry.peak_density * std::pow(two_pi, 1.5) *
                        geometry.transverse_radius * geometry.transverse_radius *
                        geometry.longitudinal_radius;
    return std::llround(mean);
}

AtomConfiguration sample_cloud(const CloudGeometry& geometry, int n_atoms,
                               std::uint64_t seed) {
    geometry.validate();
    if (n_atoms < 0)
        throw std::invalid_argument("sample_cloud: n_atoms must be >= 0");

    AtomConfiguration config;
    config.seed = seed;
    config.positions.resize(3, n_atoms);

    GaussianStream gauss(seed);
    const double r = geometry.transverse_radius;
    const double l = geometry.longitudinal_radius;
    const double min_dist2 = geometry.exclusion_radius
                                 ? (*geometry.exclusion_radius) * (*geometry.exclusion_radius)
                                 : 0.0;
    constexpr long attempts_per_atom = 100000;

    for (int j = 0; j < n_atoms; ++j) {
        long attempts = 0;
        for (;;) {
            if (++attempts > attempts_per_atom)
                throw std::runtime_error(
                    "sample_cloud: rejection cap exceeded; geometry too dense for "
                    "the requested exclusion radius");
            const double x = r * gauss.next();
            const double y = r * gauss.next();
            const double z = l * gauss.next();
            bool ok = true;
            if (min_dist2 > 0.0) {
                for (int k = 0; k < j; ++k) {
                    const double dx = x - config.positions(0, k);
                    const double dy = y - config.positions(1, k);
                    const double dz = z - config.positions(2, k);
                    if (dx * dx + dy * dy + dz * dz < min_dist2) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) {
                config.positions.col(j) << x, y, z;
                break;
            }
        }
    }
    return config;
}

void save_cloud(const AtomConfiguration& config, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("save_cloud: cannot open " + path);
    out << "# atom positions (reduced wavelengths), one atom per row: x y z\n";
    out << "# seed: " << config.seed << "\n";
    char buf[96];
    for (int j = 0; j < config.n_atoms(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", config.positions(0, j),
                      config.positions(1, j), config.positions(2, j));
        out << buf;
    }
    if (!out)
        throw std::runtime_error("save_cloud: write failed for " + path);
}

AtomConfiguration load_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_cloud: cannot open " + path);
    std::vector<Eigen::Vector3d> rows;
    std::uint64_t seed = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const auto pos = line.find("seed:");
            if (pos != std::string::npos)
                seed = std::strtoull(line.c_str() + pos + 5, nullptr, 10);
            continue;
        }
        for (char& c : line)
            if (c == ',')
                c = ' ';
        std::istringstream ss(line);
        Eigen::Vector3d p;
        if (!(ss >> p.x() >> p.y() >> p.z()))
            throw std::runtime_error("load_cloud: malformed row in " + path + ": " + line);
        rows.push_back(p);
    }
    AtomConfiguration config;
    config.seed = seed;
    config.positions.resize(3, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        config.positions.col(static_cast<Eigen::Index>(j)) = rows[j];
    return config;
}

}
