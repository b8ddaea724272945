#pragma once

#include <string>

#include "bbrcool/formats.hpp"
#include "bbrcool/scenario.hpp"

namespace test_support {

inline std::string data_path(const std::string& name) { return std::string(BBRCOOL_DATA_DIR) + "/" + name; }

inline const bbrcool::Model& mgh_model() {
    static const bbrcool::Model m = bbrcool::build_model(bbrcool::load_molecule(data_path("mgh_plus.mol")), 3, 40, 2);
    return m;
}

inline const bbrcool::Model& arh_model() {
    static const bbrcool::Model m = bbrcool::build_model(bbrcool::load_molecule(data_path("arh_plus.mol")), 3, 40, 2);
    return m;
}

}  // namespace test_support
