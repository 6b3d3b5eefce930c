#pragma once

#include "rankwalk/certificate.hpp"
#include "rankwalk/errors.hpp"
#include "rankwalk/ggd.hpp"
#include "rankwalk/io.hpp"
#include "rankwalk/least_squares.hpp"
#include "rankwalk/loss.hpp"
#include "rankwalk/lp.hpp"
#include "rankwalk/model.hpp"
#include "rankwalk/oracle.hpp"
#include "rankwalk/woa.hpp"
