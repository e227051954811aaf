"""twincity: digital-twin IoT network simulator.

A deterministic discrete-event simulator of a digital-twin-managed smart-city
network: RTPS-lite pub/sub over a domain-partitioned overlay, a device battery
model, and a DDPG scheduler that picks each device's daily transmission time.
The heavy lifting lives in the compiled extension module; this package
re-exports its public surface.
"""

from twincity._core import *  # noqa: F401,F403
from twincity._core import __version__  # noqa: F401
