#include "lincov/io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "lincov/errors.hpp"

namespace lincov {

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int p) {
    if (!j.is_array() || static_cast<int>(j.size()) != p)
        throw ParseError("matrix must have exactly p rows");
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i) {
        const auto& row = j.at(i);
        if (!row.is_array() || static_cast<int>(row.size()) != p)
            throw ParseError("matrix rows must have exactly p entries");
        for (int k = 0; k < p; ++k) m(i, k) = row.at(k).get<double>();
    }
    return m;
}

std::vector<double> parse_numeric_row(const std::string& line, const std::string& path,
                                      long line_no) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        const std::string cell =
            line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            const double value = std::stod(cell, &used);
            while (used < cell.size() &&
                   (cell[used] == ' ' || cell[used] == '\t' || cell[used] == '\r'))
                ++used;
            if (used != cell.size()) throw std::invalid_argument("trailing junk");
            out.push_back(value);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad numeric cell '" +
                             cell + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

Eigen::MatrixXd read_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(parse_numeric_row(line, path, line_no));
        if (rows.back().size() != rows.front().size())
            throw ParseError(path + ":" + std::to_string(line_no) + ": ragged row");
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");
    Eigen::MatrixXd m(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

}  // namespace

LinearCovarianceModel parse_model_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }

    try {
        if (j.is_object() && j.contains("parent")) {
            TreeSpec spec;
            spec.parent = j.at("parent").get<std::vector<int>>();
            spec.leaves = j.at("leaves").get<std::vector<int>>();
            return brownian_tree_model(spec);
        }
        if (!j.is_object() || !j.contains("p") || !j.contains("G0") || !j.contains("basis"))
            throw ParseError("model JSON needs either {parent, leaves} or {p, G0, basis}");
        const int p = j.at("p").get<int>();
        if (p < 1) throw ParseError("p must be >= 1");
        const SymmetricMatrix g0 = SymmetricMatrix::from_dense(matrix_from_json(j.at("G0"), p));
        const auto& basis_json = j.at("basis");
        if (!basis_json.is_array() || basis_json.empty())
            throw ParseError("basis must be a non-empty array of matrices");
        std::vector<SymmetricMatrix> basis;
        basis.reserve(basis_json.size());
        for (const auto& g : basis_json)
            basis.push_back(SymmetricMatrix::from_dense(matrix_from_json(g, p)));
        return build_model(g0, basis);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
}

LinearCovarianceModel load_model_json(const std::string& path) {
    return parse_model_json(slurp(path));
}

SymmetricMatrix read_matrix_csv(const std::string& path) {
    const Eigen::MatrixXd m = read_numeric_csv(path);
    if (m.rows() != m.cols())
        throw ParseError(path + ": expected a square matrix, got " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
    return SymmetricMatrix::from_dense(m);
}

Eigen::MatrixXd read_data_csv(const std::string& path) { return read_numeric_csv(path); }

std::string fit_result_json(const FitResult& result) {
    nlohmann::ordered_json out;
    out["v_hat"] = std::vector<double>(result.v_hat.data(),
                                       result.v_hat.data() + result.v_hat.size());
    out["loglik"] = result.loglik;
    out["iterations"] = result.iterations;
    out["converged"] = result.converged;
    out["diagnostics"] = {
        {"sigma_pd", result.diagnostics.sigma_pd},
        {"in_delta", result.diagnostics.in_delta},
        {"hessian_negdef_at_solution", result.diagnostics.hessian_negdef_at_solution},
    };
    return out.dump(2);
}

}  // namespace lincov
