from .reader import read_data
from .writer import monitor_frames, study_frame, write_csv, write_json

__all__ = ['read_data', 'monitor_frames', 'study_frame', 'write_csv', 'write_json']
