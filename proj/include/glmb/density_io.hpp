#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "glmb/density.hpp"
#include "glmb/errors.hpp"

namespace glmb {

// Plain-text GLMB density format, one token stream per file:
//
//   glmb-density v1
//   state_dim <d>
//   hypervolume_unit <K>
//   components <n>
//   component <history:u64> <log_weight> <label_count>
//     label <birth_time> <index> <gaussian_count>
//       gm <weight> <mean[0..d-1]> <cov[0][0..d-1] ... cov[d-1][0..d-1]>
//
// Field order is fixed as above. All reals are written with 17 significant
// digits so a write/read round trip reproduces the density bit for bit.

namespace detail {
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace detail

inline void write_density(std::ostream& os, const GlmbDensity& d) {
    os << "glmb-density v1\n";
    os << "state_dim " << d.state_dim << "\n";
    os << "hypervolume_unit " << detail::fmt17(d.hypervolume_unit) << "\n";
    os << "components " << d.components.size() << "\n";
    for (const auto& c : d.components) {
        os << "component " << c.history << " " << detail::fmt17(c.log_weight) << " "
           << c.labels.size() << "\n";
        for (std::size_t i = 0; i < c.labels.size(); ++i) {
            const auto& gm = c.densities[i];
            os << "label " << c.labels[i].birth_time << " " << c.labels[i].index << " "
               << gm.size() << "\n";
            for (std::size_t j = 0; j < gm.size(); ++j) {
                os << "gm " << detail::fmt17(gm.weight(j));
                const auto& g = gm.component(j);
                for (int r = 0; r < g.dim(); ++r) os << " " << detail::fmt17(g.mean()[r]);
                for (int r = 0; r < g.dim(); ++r) {
                    for (int cc = 0; cc < g.dim(); ++cc) {
                        os << " " << detail::fmt17(g.cov()(r, cc));
                    }
                }
                os << "\n";
            }
        }
    }
}

inline GlmbDensity read_density(std::istream& is) {
    auto expect = [&is](const char* tag) {
        std::string tok;
        if (!(is >> tok) || tok != tag) {
            throw ConfigError(std::string("density file: expected '") + tag + "'");
        }
    };
    std::string magic, version;
    if (!(is >> magic >> version) || magic != "glmb-density" || version != "v1") {
        throw ConfigError("density file: bad header (want 'glmb-density v1')");
    }
    GlmbDensity d;
    std::size_t n_components = 0;
    expect("state_dim");
    is >> d.state_dim;
    expect("hypervolume_unit");
    is >> d.hypervolume_unit;
    expect("components");
    is >> n_components;
    if (!is) throw ConfigError("density file: truncated header");

    for (std::size_t ci = 0; ci < n_components; ++ci) {
        expect("component");
        GlmbComponent c;
        std::size_t n_labels = 0;
        is >> c.history >> c.log_weight >> n_labels;
        for (std::size_t li = 0; li < n_labels; ++li) {
            expect("label");
            Label l;
            std::size_t n_gauss = 0;
            is >> l.birth_time >> l.index >> n_gauss;
            GaussianMixture gm;
            for (std::size_t gi = 0; gi < n_gauss; ++gi) {
                expect("gm");
                double w = 0.0;
                is >> w;
                Eigen::VectorXd mean(d.state_dim);
                for (int r = 0; r < d.state_dim; ++r) is >> mean[r];
                Eigen::MatrixXd cov(d.state_dim, d.state_dim);
                for (int r = 0; r < d.state_dim; ++r) {
                    for (int cc = 0; cc < d.state_dim; ++cc) is >> cov(r, cc);
                }
                if (!is) throw ConfigError("density file: truncated gaussian record");
                gm.add(w, Gaussian(std::move(mean), std::move(cov)));
            }
            c.labels.push_back(l);
            c.densities.push_back(std::move(gm));
        }
        if (!is) throw ConfigError("density file: truncated component record");
        if (!std::is_sorted(c.labels.begin(), c.labels.end())) {
            throw ConfigError("density file: labels must be sorted within a component");
        }
        d.components.push_back(std::move(c));
    }
    return d;
}

inline void save_density(const std::string& path, const GlmbDensity& d) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    write_density(os, d);
}

inline GlmbDensity load_density(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open for reading: " + path);
    return read_density(is);
}

}  // namespace glmb
