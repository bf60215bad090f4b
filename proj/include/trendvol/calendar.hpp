#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace trendvol {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date `YYYY-MM-DD`.
std::optional<Date> parse_date(std::string_view text);

std::string format_date(const Date& date);

/// Next Monday-to-Friday day after `date`.
Date next_weekday(const Date& date);

}  // namespace trendvol
