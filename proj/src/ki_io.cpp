#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "qki/ki.hpp"

namespace qki {

using jsonu::json;

std::string ki_to_json(const KIDecomposition& ki) {
    json j;
    j["dim_A"] = ki.dim_a;
    j["dim_R"] = ki.dim_r;
    j["blocks"] = json::array();
    for (const auto& b : ki.blocks) {
        json jb;
        jb["p"] = b.p;
        jb["q_dim"] = b.q_dim;
        jb["n_dim"] = b.n_dim;
        jb["omega_re"] = jsonu::matrix_part(b.omega.matrix(), true);
        jb["omega_im"] = jsonu::matrix_part(b.omega.matrix(), false);
        jb["rho_qr_re"] = jsonu::matrix_part(b.rho_qr.matrix(), true);
        jb["rho_qr_im"] = jsonu::matrix_part(b.rho_qr.matrix(), false);
        j["blocks"].push_back(std::move(jb));
    }
    j["u_ki_re"] = jsonu::matrix_part(ki.u_ki, true);
    j["u_ki_im"] = jsonu::matrix_part(ki.u_ki, false);
    j["support_re"] = jsonu::matrix_part(ki.support_proj, true);
    j["support_im"] = jsonu::matrix_part(ki.support_proj, false);
    return j.dump();
}

KIDecomposition ki_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("decomposition json: parse failure: ") + e.what());
    }
    KIDecomposition ki;
    try {
        ki.dim_a = j.at("dim_A").get<Index>();
        ki.dim_r = j.at("dim_R").get<Index>();
        for (const auto& jb : j.at("blocks")) {
            const double p = jb.at("p").get<double>();
            const Index qd = jb.at("q_dim").get<Index>();
            const Index nd = jb.at("n_dim").get<Index>();
            MultipartiteState omega(
                SystemDims({{"N", nd}}),
                jsonu::matrix_from_parts(jb.at("omega_re"), jb.at("omega_im"), "omega"));
            MultipartiteState rho_qr(
                SystemDims({{"Q", qd}, {"R", ki.dim_r}}),
                jsonu::matrix_from_parts(jb.at("rho_qr_re"), jb.at("rho_qr_im"), "rho_qr"));
            ki.blocks.push_back({p, qd, nd, std::move(omega), std::move(rho_qr)});
        }
        ki.u_ki = jsonu::matrix_from_parts(j.at("u_ki_re"), j.at("u_ki_im"), "u_ki");
        ki.support_proj =
            jsonu::matrix_from_parts(j.at("support_re"), j.at("support_im"), "support");
    } catch (const json::exception& e) {
        throw Error(std::string("decomposition json: bad field: ") + e.what());
    }
    ki.validate(1e-9);
    return ki;
}

void save_ki(const KIDecomposition& ki, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << ki_to_json(ki) << "\n";
}

KIDecomposition load_ki(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ki_from_json(ss.str());
}

}  // namespace qki
