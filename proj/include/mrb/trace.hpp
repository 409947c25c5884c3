#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mrb {

/// Uniformly sampled simulation time series. Column layout is fixed and
/// versioned: t, v_ref, v_out, i_out, i_load, p_out, then per module
/// (i_b, v_b, p_b, soc), then per group (i_circ, i1, i2, mode).
class SimTrace {
public:
    SimTrace() = default;
    SimTrace(std::size_t n_modules, std::size_t n_groups);

    [[nodiscard]] std::size_t n_modules() const { return n_modules_; }
    [[nodiscard]] std::size_t n_groups() const { return n_groups_; }
    [[nodiscard]] std::size_t n_cols() const { return columns_.size(); }
    [[nodiscard]] std::size_t n_rows() const { return n_cols() ? data_.size() / n_cols() : 0; }
    [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
    [[nodiscard]] const std::vector<double>& data() const { return data_; }

    void append_row(const std::vector<double>& row);
    [[nodiscard]] double at(std::size_t row, std::size_t col) const;
    [[nodiscard]] double at(std::size_t row, const std::string& column) const;
    [[nodiscard]] std::size_t column_index(const std::string& column) const;

    [[nodiscard]] std::string to_csv() const;
    static SimTrace from_csv(const std::string& csv);

    static constexpr const char* format_tag = "# mrbsim-trace v1";

private:
    std::size_t n_modules_ = 0;
    std::size_t n_groups_ = 0;
    std::vector<std::string> columns_;
    std::vector<double> data_; // row-major
};

} // namespace mrb
