#include "qcavity/collocation.hpp"

#include "qcavity/errors.hpp"

namespace qcavity {

CollocationSet make_collocation(int nx, int ny, const Domain& domain) {
    if (nx < 3 || ny < 3) throw ConfigError("collocation grid needs nx, ny >= 3");
    if (domain.width() <= 0 || domain.height() <= 0)
        throw ConfigError("domain must have positive extent");
    CollocationSet set;
    set.reference_point = {domain.x0, domain.y0};
    for (int j = 0; j < ny; ++j) {
        const double y = domain.y0 + domain.height() * double(j) / double(ny - 1);
        for (int i = 0; i < nx; ++i) {
            const double x = domain.x0 + domain.width() * double(i) / double(nx - 1);
            if (j == ny - 1)
                set.lid.push_back({x, y});
            else if (i == 0 || i == nx - 1 || j == 0)
                set.wall.push_back({x, y});
            else
                set.interior.push_back({x, y});
        }
    }
    return set;
}

} // namespace qcavity
