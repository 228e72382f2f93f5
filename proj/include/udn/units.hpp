#pragma once

#include <cmath>

// Unit conventions used throughout: distances in km, powers in linear mW,
// SINR thresholds linear. dB/dBm and meters appear only at the config/CLI
// boundary; these helpers are that boundary.

namespace udn {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

inline double m_to_km(double m) { return m * 1e-3; }
inline double km_to_m(double km) { return km * 1e3; }

} // namespace udn
