#pragma once

#include "degradiag/degradiag.hpp"

#include <filesystem>
#include <string>

namespace support {

namespace fs = std::filesystem;

inline fs::path data_dir() { return DEGRADIAG_DATA_DIR; }

inline const degradiag::CellParameters& reference_cell()
{
    static const degradiag::CellParameters cell = degradiag::load_cell_config(data_dir() / "cell.json");
    return cell;
}

inline const degradiag::VoltageTrace& fresh_trace()
{
    static const degradiag::VoltageTrace t = degradiag::simulate_constant_current(reference_cell(), 0.05, 10.0);
    return t;
}

/// Cell carrying an explicit (c_n0, eps_n, eps_p) triple.
inline degradiag::CellParameters aged_cell(double c_n0, double eps_n, double eps_p)
{
    using namespace degradiag;
    CellParameters c = with_cn0(reference_cell(), c_n0);
    c = with_epsilon(c, ElectrodeTag::negative, eps_n);
    return with_epsilon(c, ElectrodeTag::positive, eps_p);
}

/// Fresh scratch directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("degradiag_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace support
