#include "kpgot/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace kpgot {

namespace {

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double parse_double(const std::string &text, const std::string &where) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    require(ec == std::errc{} && ptr == t.data() + t.size() && !t.empty(), ErrorCode::Io,
            where + ": cannot parse number '" + t + "'");
    return v;
}

std::ifstream open_in(const std::string &path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::Io, "cannot write " + path);
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

DiscreteDistribution read_points_csv(const std::string &path) {
    std::ifstream in = open_in(path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io, path + ": empty file");
    const auto header = split(line);
    Index dim = 0;
    bool has_weight = false;
    for (std::size_t k = 0; k < header.size(); ++k) {
        const std::string h = trim(header[k]);
        if (h == "weight" && k + 1 == header.size()) {
            has_weight = true;
        } else {
            require(h == "x" + std::to_string(k), ErrorCode::Io,
                    path + ": header must be x0,x1,...[,weight], got '" + h + "'");
            ++dim;
        }
    }
    require(dim >= 1, ErrorCode::Io, path + ": no coordinate columns");

    std::vector<double> coords;
    std::vector<double> weights;
    Index rows = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto cells = split(line);
        const std::string where = path + ":" + std::to_string(lineno);
        require(cells.size() == header.size(), ErrorCode::Io, where + ": wrong number of columns");
        for (Index x = 0; x < dim; ++x)
            coords.push_back(parse_double(cells[static_cast<std::size_t>(x)], where));
        if (has_weight)
            weights.push_back(parse_double(cells.back(), where));
        ++rows;
    }
    require(rows >= 1, ErrorCode::Io, path + ": no points");
    Matrix points(rows, dim);
    for (Index i = 0; i < rows; ++i)
        for (Index x = 0; x < dim; ++x)
            points(i, x) = coords[static_cast<std::size_t>(i * dim + x)];
    if (!has_weight)
        return make_uniform_distribution(std::move(points));
    Vector w = Eigen::Map<Vector>(weights.data(), rows);
    return make_distribution(std::move(points), std::move(w), MassMode::Raw);
}

void write_points_csv(const std::string &path, const DiscreteDistribution &dist) {
    std::ofstream out = open_out(path);
    for (Index x = 0; x < dist.dim(); ++x)
        out << 'x' << x << ',';
    out << "weight\n";
    for (Index i = 0; i < dist.count(); ++i) {
        for (Index x = 0; x < dist.dim(); ++x)
            out << format_double(dist.points()(i, x)) << ',';
        out << format_double(dist.weight(i)) << '\n';
    }
}

KeypointPairing read_keypoints_json(const std::string &path) {
    std::ifstream in = open_in(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        fail(ErrorCode::Io, path + ": " + e.what());
    }
    require(doc.is_object() && doc.contains("pairs") && doc["pairs"].is_array(), ErrorCode::Io,
            path + ": expected an object with a 'pairs' array");
    int base = 0;
    if (doc.contains("indexing")) {
        require(doc["indexing"].is_number_integer(), ErrorCode::Io,
                path + ": 'indexing' must be 0 or 1");
        base = doc["indexing"].get<int>();
        require(base == 0 || base == 1, ErrorCode::Io, path + ": 'indexing' must be 0 or 1");
    }
    std::vector<IndexPair> pairs;
    for (const auto &item : doc["pairs"]) {
        require(item.is_array() && item.size() == 2 && item[0].is_number_integer() &&
                    item[1].is_number_integer(),
                ErrorCode::Io, path + ": each pair must be [i, j]");
        pairs.emplace_back(item[0].get<Index>() - base, item[1].get<Index>() - base);
    }
    return KeypointPairing(std::move(pairs));
}

void write_plan_csv(const std::string &path, const Matrix &plan) {
    std::ofstream out = open_out(path);
    if (std::min(plan.rows(), plan.cols()) <= kDensePlanLimit) {
        for (Index i = 0; i < plan.rows(); ++i) {
            for (Index j = 0; j < plan.cols(); ++j) {
                if (j > 0)
                    out << ',';
                out << format_double(plan(i, j));
            }
            out << '\n';
        }
        return;
    }
    out << "i,j,value\n";
    for (Index i = 0; i < plan.rows(); ++i)
        for (Index j = 0; j < plan.cols(); ++j)
            if (plan(i, j) != 0.0)
                out << i << ',' << j << ',' << format_double(plan(i, j)) << '\n';
}

Matrix read_plan_csv(const std::string &path, Index rows, Index cols) {
    std::ifstream in = open_in(path);
    std::string line;
    std::vector<std::vector<double>> dense;
    bool sparse = false;
    std::vector<std::tuple<Index, Index, double>> triplets;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const std::string where = path + ":" + std::to_string(lineno);
        if (lineno == 1 && trim(line) == "i,j,value") {
            sparse = true;
            continue;
        }
        const auto cells = split(line);
        if (sparse) {
            require(cells.size() == 3, ErrorCode::Io, where + ": expected i,j,value");
            const double i = parse_double(cells[0], where);
            const double j = parse_double(cells[1], where);
            triplets.emplace_back(static_cast<Index>(i), static_cast<Index>(j),
                                  parse_double(cells[2], where));
        } else {
            std::vector<double> row;
            for (const auto &c : cells)
                row.push_back(parse_double(c, where));
            require(dense.empty() || row.size() == dense.front().size(), ErrorCode::Io,
                    where + ": ragged row");
            dense.push_back(std::move(row));
        }
    }
    if (!sparse) {
        require(!dense.empty(), ErrorCode::Io, path + ": empty plan");
        Matrix out(static_cast<Index>(dense.size()), static_cast<Index>(dense.front().size()));
        for (Index i = 0; i < out.rows(); ++i)
            for (Index j = 0; j < out.cols(); ++j)
                out(i, j) = dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        return out;
    }
    Index m = rows;
    Index n = cols;
    if (m < 0 || n < 0) {
        Index mi = 0;
        Index mj = 0;
        for (const auto &[i, j, v] : triplets) {
            mi = std::max(mi, i + 1);
            mj = std::max(mj, j + 1);
        }
        m = m < 0 ? mi : m;
        n = n < 0 ? mj : n;
    }
    Matrix out = Matrix::Zero(m, n);
    for (const auto &[i, j, v] : triplets) {
        require(i >= 0 && i < m && j >= 0 && j < n, ErrorCode::Io,
                path + ": triplet index out of range");
        out(i, j) = v;
    }
    return out;
}

} // namespace kpgot
