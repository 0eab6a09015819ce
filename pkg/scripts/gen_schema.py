import json

from mabs.config import Settings
from mabs.models import DownlinkEvent

print(
    json.dumps(
        {"settings": Settings.model_json_schema(), "event": DownlinkEvent.model_json_schema()},
        indent=2,
    )
)
