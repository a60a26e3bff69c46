# flake8: noqa

from fixtures.systems import *
