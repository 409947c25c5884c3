#include "mrb/trace.hpp"

#include "mrb/errors.hpp"

#include <cstdio>
#include <cstring>
#include <sstream>

namespace mrb {

SimTrace::SimTrace(std::size_t n_modules, std::size_t n_groups)
    : n_modules_(n_modules), n_groups_(n_groups) {
    columns_ = {"t", "v_ref", "v_out", "i_out", "i_load", "p_out"};
    for (std::size_t j = 0; j < n_modules; ++j) {
        const std::string s = std::to_string(j + 1);
        columns_.push_back("i_b" + s);
        columns_.push_back("v_b" + s);
        columns_.push_back("p_b" + s);
        columns_.push_back("soc" + s);
    }
    for (std::size_t g = 0; g < n_groups; ++g) {
        const std::string s = std::to_string(g + 1);
        columns_.push_back("i_circ" + s);
        columns_.push_back("i1_" + s);
        columns_.push_back("i2_" + s);
        columns_.push_back("mode" + s);
    }
}

void SimTrace::append_row(const std::vector<double>& row) {
    if (row.size() != columns_.size()) {
        throw LengthMismatch("SimTrace::append_row: column count mismatch");
    }
    data_.insert(data_.end(), row.begin(), row.end());
}

double SimTrace::at(std::size_t row, std::size_t col) const {
    return data_.at(row * n_cols() + col);
}

double SimTrace::at(std::size_t row, const std::string& column) const {
    return at(row, column_index(column));
}

std::size_t SimTrace::column_index(const std::string& column) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c] == column) return c;
    }
    throw IndexOutOfRange("SimTrace: no column named " + column);
}

std::string SimTrace::to_csv() const {
    std::string out;
    out.reserve(data_.size() * 14 + 256);
    out += format_tag;
    out += '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c) out += ',';
        out += columns_[c];
    }
    out += '\n';
    char buf[40];
    const std::size_t nc = n_cols();
    for (std::size_t r = 0; r < n_rows(); ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data_[r * nc + c]);
            if (c) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

SimTrace SimTrace::from_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line) || line != format_tag) {
        throw ParseError("SimTrace::from_csv: missing format tag");
    }
    if (!std::getline(is, line)) throw ParseError("SimTrace::from_csv: missing header");
    SimTrace t;
    {
        std::istringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) t.columns_.push_back(col);
    }
    for (const auto& c : t.columns_) {
        if (c.rfind("soc", 0) == 0) ++t.n_modules_;
        if (c.rfind("i_circ", 0) == 0) ++t.n_groups_;
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t n = 0;
        while (std::getline(ls, cell, ',')) {
            t.data_.push_back(std::strtod(cell.c_str(), nullptr));
            ++n;
        }
        if (n != t.columns_.size()) throw ParseError("SimTrace::from_csv: ragged row");
    }
    return t;
}

} // namespace mrb
