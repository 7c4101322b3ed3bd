#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "drift/errors.hpp"
#include "drift/weighted_operator.hpp"

namespace drift {

Eigen::VectorXd read_field_csv(std::istream& in) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        double v = 0.0;
        if (!(ss >> v)) throw ParseError(line_no, "expected a number");
        ss >> std::ws;
        if (!ss.eof()) throw ParseError(line_no, "expected one value per line");
        values.push_back(v);
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::VectorXd read_field_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_field_csv(in);
}

void write_field_csv(const Eigen::VectorXd& values, std::ostream& out) {
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < values.size(); ++i) out << values[i] << '\n';
}

}  // namespace drift
