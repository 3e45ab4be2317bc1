#include "slowfast/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slowfast {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("csv: cannot parse number '" + s + "'");
    }
}

}  // namespace

std::string path_to_csv(const PathSample& path) {
    std::ostringstream os;
    const int d = static_cast<int>(path.slow.rows());
    os << "t";
    for (int i = 0; i < d; ++i) os << ",x" << i;
    for (int i = 0; i < static_cast<int>(path.fast.rows()); ++i) os << ",y" << i;
    os << "\n";
    for (Eigen::Index k = 0; k < path.times.size(); ++k) {
        os << format_double(path.times[k]);
        for (int i = 0; i < d; ++i) os << "," << format_double(path.slow(i, k));
        for (int i = 0; i < static_cast<int>(path.fast.rows()); ++i)
            os << "," << format_double(path.fast(i, k));
        os << "\n";
    }
    return os.str();
}

std::string control_to_csv(const Control& control) {
    std::ostringstream os;
    const int d = control.dim();
    os << "interval";
    for (int i = 0; i < d; ++i) os << ",hdot1_" << i;
    for (int i = 0; i < d; ++i) os << ",hdot2_" << i;
    os << "\n";
    for (int k = 0; k < control.M; ++k) {
        os << k;
        for (int i = 0; i < d; ++i) os << "," << format_double(control.hdot1(i, k));
        for (int i = 0; i < d; ++i) os << "," << format_double(control.hdot2(i, k));
        os << "\n";
    }
    return os.str();
}

Control control_from_csv(const std::string& text, double T) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("control csv: empty input");
    const auto header = split(line, ',');
    if (header.size() < 3 || header[0] != "interval")
        throw ConfigError("control csv: malformed header");
    const int d = static_cast<int>((header.size() - 1) / 2);

    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (static_cast<int>(cells.size()) != 1 + 2 * d)
            throw ConfigError("control csv: wrong column count");
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(parse_double(cells[i]));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("control csv: no intervals");

    Control c = Control::zero(d, static_cast<int>(rows.size()), T);
    for (int k = 0; k < c.M; ++k) {
        for (int i = 0; i < d; ++i) {
            c.hdot1(i, k) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            c.hdot2(i, k) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(d + i)];
        }
    }
    c.validate();
    return c;
}

std::string drift_table_to_csv(const AveragedDrift& drift) {
    if (!drift.tabulated()) throw ConfigError("drift csv: drift is not tabulated");
    std::ostringstream os;
    os << "x,fbar,se\n";
    for (std::size_t i = 0; i < drift.grid_x.size(); ++i) {
        const double se = i < drift.grid_se.size() ? drift.grid_se[i] : 0.0;
        os << format_double(drift.grid_x[i]) << "," << format_double(drift.grid_f[i]) << ","
           << format_double(se) << "\n";
    }
    return os.str();
}

AveragedDrift drift_table_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || split(line, ',').size() != 3)
        throw ConfigError("drift csv: malformed header");
    std::vector<double> xs, fs, ses;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 3) throw ConfigError("drift csv: wrong column count");
        xs.push_back(parse_double(cells[0]));
        fs.push_back(parse_double(cells[1]));
        ses.push_back(parse_double(cells[2]));
    }
    return AveragedDrift::from_table(std::move(xs), std::move(fs), std::move(ses),
                                     "imported csv table");
}

std::string sweep_to_csv(const LdpSweep& sweep) {
    std::ostringstream os;
    os << "epsilon,p_hat,se,eps_log_p,gap,method,n_paths\n";
    for (const auto& r : sweep.rows) {
        os << format_double(r.epsilon) << "," << format_double(r.p_hat) << ","
           << format_double(r.se) << ",";
        if (r.estimable) {
            os << format_double(r.eps_log_p) << "," << format_double(r.gap);
        } else {
            os << "unestimable,unestimable";
        }
        os << "," << r.method << "," << r.n_paths << "\n";
    }
    return os.str();
}

std::string flow_to_csv(const FlowMoments& flow) {
    std::ostringstream os;
    os << "i,j,separation,moment,se\n";
    for (const auto& pr : flow.pairs) {
        os << pr.i << "," << pr.j << "," << format_double(pr.separation) << ","
           << format_double(pr.moment) << "," << format_double(pr.se) << "\n";
    }
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << content;
    if (!os) throw NumericError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open for reading: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace slowfast
