#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "couplesim/calibration.hpp"
#include "couplesim/statistics.hpp"

namespace couplesim {

// CSV writers shared by the commands. Every file has a header row; numbers
// use six significant digits and undefined statistics print as "-".

// moment,model,target
void write_moments_csv(std::ostream& os, const MomentSet& m, const CalibrationTargets* targets);


// scenario,husband,R,NR,NW
void write_occupation_csv(std::ostream& os,
                          const std::vector<std::pair<std::string, OccupationMatrix>>& panels);
// scenario,husband,wife,h_m,h_f,d_m,d_f,weight   (weekly hours)
void write_hours_csv(std::ostream& os, const std::vector<std::pair<std::string, HoursTable>>& panels);
// scenario,participation,occupation,hours,wage
void write_gaps_csv(std::ostream& os, const std::vector<std::pair<std::string, GapSet>>& rows);
// kind,bin_lo,bin_hi,mass,density   (kind = bin | atom)
void write_relative_earnings_csv(std::ostream& os, const RelativeEarningsDensity& d);

}  // namespace couplesim
