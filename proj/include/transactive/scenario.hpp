#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "transactive/engine.hpp"
#include "transactive/events.hpp"

namespace transactive {

/// Edge probability used when a scenario omits its edge list.
inline constexpr double kDefaultEdgeProbability = 0.2;

/// Parses and fully validates a scenario document. Throws ParseError for
/// unreadable input and ValidationError listing every problem found, each
/// prefixed with its line number.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

/// Checks that do not depend on the file layout: feasibility of initial
/// points, connectivity before and after every event, references to agents.
std::vector<std::string> validate_scenario(const Scenario& scenario);

void write_scenario(const Scenario& scenario, std::ostream& out);
void write_scenario(const Scenario& scenario, const std::string& path);

inline constexpr const char* kCsvHeader =
    "k,agent_id,kind,power,base_load,price,P_G,P_D,social_welfare,imbalance,box_violation,"
    "rate_violation";

void write_records(const std::vector<IterationRecord>& records, std::ostream& out);
void write_records(const std::vector<IterationRecord>& records, const std::string& path);

/// power.svg, balance.svg and price.svg line charts in `dir`.
void write_plots(const std::vector<IterationRecord>& records, const std::string& dir);

/// Logger on stderr. Level from TRANSACTIVE_LOG (trace..critical, off), default warn.
void configure_logging();

int cli_main(int argc, char** argv);

}  // namespace transactive
