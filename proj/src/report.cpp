#include "couplesim/report.hpp"

#include <algorithm>
#include <ostream>

#include "couplesim/format.hpp"

namespace couplesim {

void write_moments_csv(std::ostream& os, const MomentSet& m, const CalibrationTargets* targets) {
    os << "moment,model,target\n";
    const auto values = m.as_array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        os << MomentSet::names()[i] << "," << format_stat(values[i]) << ",";
        os << (targets ? format_number(targets->values[i]) : "-") << "\n";
    }
}

void write_occupation_csv(std::ostream& os,
                          const std::vector<std::pair<std::string, OccupationMatrix>>& panels) {
    os << "scenario,husband,R,NR,NW\n";
    for (const auto& [label, m] : panels)
        for (Occupation jm : kOccupations) {
            os << label << "," << occupation_code(jm);
            for (Occupation jf : kOccupations)
                os << "," << format_number(m[index_of(jm)][index_of(jf)]);
            os << "\n";
        }
}

void write_hours_csv(std::ostream& os, const std::vector<std::pair<std::string, HoursTable>>& panels) {
    os << "scenario,husband,wife,h_m,h_f,d_m,d_f,weight\n";
    for (const auto& [label, t] : panels)
        for (const HoursCell& c : t)
            os << label << "," << occupation_code(c.husband) << "," << occupation_code(c.wife) << ","
               << format_stat(c.h_m) << "," << format_stat(c.h_f) << "," << format_stat(c.d_m) << ","
               << format_stat(c.d_f) << "," << format_number(c.weight) << "\n";
}

void write_gaps_csv(std::ostream& os, const std::vector<std::pair<std::string, GapSet>>& rows) {
    os << "scenario,participation,occupation,hours,wage\n";
    for (const auto& [label, g] : rows) {
        os << label;
        for (double v : g.as_array()) os << "," << format_number(v);
        os << "\n";
    }
}

void write_relative_earnings_csv(std::ostream& os, const RelativeEarningsDensity& d) {
    os << "kind,bin_lo,bin_hi,mass,density\n";
    for (std::size_t b = 0; b < d.mass.size(); ++b) {
        const double lo = d.bin_width * static_cast<double>(b);
        const double hi = std::min(1.0, lo + d.bin_width);
        os << "bin," << format_number(lo) << "," << format_number(hi) << ","
           << format_number(d.mass[b]) << "," << format_number(d.density(b)) << "\n";
    }
    os << "atom," << format_number(0.5) << "," << format_number(0.5) << ","
       << format_number(d.atom_half) << ",-\n";
}

}  // namespace couplesim
