#pragma once

#include <json.hpp>

#include "qki/errors.hpp"
#include "qki/linalg.hpp"

namespace qki::jsonu {

using nlohmann::json;

inline json matrix_part(const la::MatrixXcd& m, bool real) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(real ? m(i, j).real() : m(i, j).imag());
        rows.push_back(row);
    }
    return rows;
}

inline la::MatrixXcd matrix_from_parts(const json& re, const json& im, const char* what) {
    if (!re.is_array() || re.empty())
        throw Error(std::string(what) + ": real part must be a nonempty array");
    const Index rows = static_cast<Index>(re.size());
    if (!re.at(0).is_array()) throw Error(std::string(what) + ": rows must be arrays");
    const Index cols = static_cast<Index>(re.at(0).size());
    if (!im.is_array() || static_cast<Index>(im.size()) != rows)
        throw Error(std::string(what) + ": imaginary part shape differs from real part");
    la::MatrixXcd m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto& rre = re.at(static_cast<size_t>(i));
        const auto& rim = im.at(static_cast<size_t>(i));
        if (static_cast<Index>(rre.size()) != cols || static_cast<Index>(rim.size()) != cols)
            throw Error(std::string(what) + ": ragged matrix rows");
        for (Index j = 0; j < cols; ++j)
            m(i, j) = la::cplx(rre.at(static_cast<size_t>(j)).get<double>(),
                               rim.at(static_cast<size_t>(j)).get<double>());
    }
    return m;
}

}  // namespace qki::jsonu
