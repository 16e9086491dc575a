#pragma once

#include "bbs/config.hpp"
#include "bbs/core.hpp"
#include "bbs/empirics.hpp"
#include "bbs/error.hpp"
#include "bbs/hydro.hpp"
#include "bbs/io.hpp"
#include "bbs/plf.hpp"
#include "bbs/scattering.hpp"
#include "bbs/soliton.hpp"
#include "bbs/speeds.hpp"
