#pragma once

#include "netmsf/errors.hpp"
#include "netmsf/io.hpp"
#include "netmsf/model.hpp"
#include "netmsf/graphs.hpp"
#include "netmsf/msf.hpp"
#include "netmsf/verify.hpp"
#include "netmsf/design.hpp"
#include "netmsf/probability.hpp"

#define NETMSF_VERSION "1.0.0"
