#ifndef RFID_RFID_HPP
#define RFID_RFID_HPP

#include "rfid/baselines.hpp"
#include "rfid/channel.hpp"
#include "rfid/core.hpp"
#include "rfid/errors.hpp"
#include "rfid/harness.hpp"
#include "rfid/protocol_p.hpp"

#endif // RFID_RFID_HPP
