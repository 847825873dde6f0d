#include "qki/state_io.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "qki/errors.hpp"

namespace qki {

using jsonu::json;

std::string state_to_json(const MultipartiteState& s) {
    json j;
    j["dims"] = json::array();
    for (const auto& e : s.dims().entries()) j["dims"].push_back({e.label, e.dim});
    j["matrix_re"] = jsonu::matrix_part(s.matrix(), true);
    j["matrix_im"] = jsonu::matrix_part(s.matrix(), false);
    return j.dump();
}

MultipartiteState state_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("state json: parse failure: ") + e.what());
    }
    for (const char* field : {"dims", "matrix_re", "matrix_im"})
        if (!j.contains(field)) throw Error(std::string("state json: missing field '") + field + "'");
    std::vector<LabeledDim> entries;
    try {
        for (const auto& pair : j.at("dims"))
            entries.push_back({pair.at(0).get<std::string>(), pair.at(1).get<Index>()});
    } catch (const json::exception& e) {
        throw Error(std::string("state json: bad 'dims' entry: ") + e.what());
    }
    MatrixXcd m;
    try {
        m = jsonu::matrix_from_parts(j.at("matrix_re"), j.at("matrix_im"), "state json");
    } catch (const json::exception& e) {
        throw Error(std::string("state json: bad matrix entry: ") + e.what());
    }
    MultipartiteState s(SystemDims(entries), std::move(m));
    s.validate_full();
    return s;
}

void save_state(const MultipartiteState& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << state_to_json(s) << "\n";
}

MultipartiteState load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return state_from_json(ss.str());
}

}  // namespace qki
